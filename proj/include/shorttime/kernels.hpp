#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "shorttime/potentials.hpp"
#include "shorttime/processes.hpp"
#include "shorttime/quadrature.hpp"

namespace shorttime {

struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  double beta = 1.0;

  /// sqrt(hbar^2 beta / m).
  double sigma() const;
  PhysicalParams with_beta(double b) const { return {hbar, mass, b}; }
  void validate() const;
};

/// hbar^2 / (1 amu * 1 Angstrom^2 * k_B) in kelvin, from CODATA 2018 constants.
double units_constant();

/// Parameters for a particle of `mass_amu` in the K / Angstrom / amu system:
/// hbar = 1 and mass = mass_amu / units_constant().
PhysicalParams kelvin_angstrom_params(double mass_amu, double beta_per_kelvin);

/// Free-particle density (2 pi sigma^2)^{-1/2} exp(-(x'-x)^2 / (2 sigma^2)).
double rho_fp(const PhysicalParams& params, double x, double xp);

enum class KernelKind { FreeParticle, Trotter, ContinuousReweighted, DiscreteReweighted };

std::string_view to_string(KernelKind kind);

inline constexpr int kDefaultGaussHermitePoints = 10;

/// Short-time density-matrix approximation rho_0(x, x'; beta). Reweighted
/// kinds average exp(-beta <V>) over the path x + (x'-x)u + sigma sum a_k
/// Lambda_k(u) with a tensor Gauss-Hermite rule in a_1..a_q. Gauss-Hermite
/// nodes and the Lambda tables are built once at construction.
class ShortTimeKernel {
 public:
  static ShortTimeKernel free_particle(Potential potential);
  /// rho_fp exp(-beta (V(x) + V(x')) / 2).
  static ShortTimeKernel trotter(Potential potential);
  /// Continuous time average; default rule is the 16x8 sine-squared composite.
  static ShortTimeKernel continuous(LambdaSystem system, Potential potential,
                                    int gh_points = kDefaultGaussHermitePoints,
                                    std::optional<Rule1D> time_rule = std::nullopt);
  /// Discrete time average sum_i w_i V(path(u_i)).
  static ShortTimeKernel discrete(LambdaSystem system, Rule1D rule, Potential potential,
                                  int gh_points = kDefaultGaussHermitePoints);

  KernelKind kind() const noexcept { return kind_; }
  const Potential& potential() const noexcept { return potential_; }
  /// Null for FreeParticle and Trotter.
  const LambdaSystem* system() const noexcept { return system_.get(); }
  const Rule1D& time_rule() const noexcept { return time_rule_; }
  int gh_points() const noexcept { return gh_points_; }

  /// rho_0 / rho_fp. Returns 0 where the potential is +infinity along every
  /// sampled path; throws Errc::numerical on NaN.
  double ratio(const PhysicalParams& params, double x, double xp) const;
  double rho0(const PhysicalParams& params, double x, double xp) const;

 private:
  ShortTimeKernel(KernelKind kind, Potential potential) : kind_(kind), potential_(std::move(potential)) {}
  void build_tables();

  KernelKind kind_;
  Potential potential_;
  std::shared_ptr<const LambdaSystem> system_;
  Rule1D time_rule_;
  int gh_points_ = 0;
  // Per Gauss-Hermite node g: weight and profile sum_k a_k Lambda_k(u_i).
  std::vector<double> node_weights_;
  std::vector<double> profiles_;  // node-major, time_rule_.size() per node
};

}  // namespace shorttime
