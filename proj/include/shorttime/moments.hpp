#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "shorttime/processes.hpp"
#include "shorttime/quadrature.hpp"

namespace shorttime {

/// One functional equation: multiplicities (j_1..j_{2mu}) with
/// sum_k k j_k = 2mu. j_1 counts end-point factors B_1, j_2 counts M_0,
/// and j_{k+2} counts the path moment M_k = average of B_u^k.
struct MomentIndex {
  int mu = 0;
  std::vector<int> j;

  /// Validates the partition constraint; mu is inferred.
  static MomentIndex from_multiplicities(std::vector<int> j);
  /// Sparse form, e.g. {{6, 1}} for j_6 = 1 within mu.
  static MomentIndex from_sparse(int mu, std::initializer_list<std::pair<int, int>> parts);

  /// Number of Gaussian factors: j_1 + sum_{k>=3} (k-2) j_k.
  int gaussian_degree() const;
  /// Number of time variables: sum_{k>=3} j_k.
  int time_dimension() const;
  /// Nonzero components, largest k first: "j6=1", "j5=1,j1=1".
  std::string label() const;

  friend bool operator==(const MomentIndex&, const MomentIndex&) = default;
};

/// All of J_mu in table order (lexicographically descending partitions).
std::vector<MomentIndex> enumerate_indices(int mu);

/// Indices for 1 <= mu <= nu.
std::vector<MomentIndex> enumerate_indices_up_to(int nu);

struct ContinuousAverage {};
struct DiscreteAverage {
  Rule1D rule;
};

/// Which process and which time average define the moments M_k.
class MomentSpec {
 public:
  static MomentSpec exact_brownian();
  static MomentSpec continuous(CovarianceKernel kernel);
  /// Weights must sum to 1 within 1e-14.
  static MomentSpec discrete(CovarianceKernel kernel, Rule1D rule);
  /// Endpoint rule {0,1}, weights 1/2: trapezoidal Trotter. The bridge
  /// functions vanish at both quadrature points, so the result does not
  /// depend on the system chosen.
  static MomentSpec trotter();

  const CovarianceKernel& kernel() const noexcept { return kernel_; }
  bool is_discrete() const noexcept { return std::holds_alternative<DiscreteAverage>(average_); }
  const Rule1D& rule() const;

 private:
  MomentSpec(CovarianceKernel k, std::variant<ContinuousAverage, DiscreteAverage> a)
      : kernel_(std::move(k)), average_(std::move(a)) {}
  CovarianceKernel kernel_;
  std::variant<ContinuousAverage, DiscreteAverage> average_;
};

/// Max time dimension handled by the deterministic exact-Brownian integrator.
inline constexpr int kMaxExactTimeDimension = 4;

/// E[B_1^{j_1} M_0^{j_2} M_1^{j_3} ...] by Isserlis pairing over the
/// covariance kernel. Arbitrary multiplicity tuples are accepted; an odd
/// Gaussian degree yields exactly 0.
double expectation(const MomentSpec& spec, std::span<const int> j);

inline double moment(const MomentSpec& spec, const MomentIndex& idx) {
  return expectation(spec, idx.j);
}

struct OrderEntry {
  MomentIndex index;
  double lhs = 0.0;  // exact Brownian
  double rhs = 0.0;  // under the averaging scheme
  double residual = 0.0;
  bool pass = false;
};

struct OrderReport {
  int nu = 0;
  double tol = 0.0;
  std::vector<OrderEntry> entries;
  double max_residual = 0.0;
  bool pass = false;

  std::vector<MomentIndex> violated() const;
};

/// Default tolerance: 1e-9 for continuous specs, 1e-10 for discrete ones
/// (calibration roundoff is amplified by the squared constants).
double default_order_tolerance(const MomentSpec& spec);

OrderReport verify_order(const MomentSpec& spec, int nu, double tol);
inline OrderReport verify_order(const MomentSpec& spec, int nu) {
  return verify_order(spec, nu, default_order_tolerance(spec));
}

nlohmann::json to_json(const MomentIndex& idx);
nlohmann::json to_json(const OrderReport& report);

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct QuarticCheck {
  double monte_carlo = 0.0;
  double standard_error = 0.0;
  double pairing = 0.0;
};

/// E[sum a_i a_j a_k a_l M_ijkl] for i.i.d. standard normals, by sampling
/// and by the three-pairing sum. M is row-major dim^4.
QuarticCheck isserlis_quartic_check(std::span<const double> M, int dim, long samples = 1'000'000,
                                    std::uint64_t seed = 12345);

/// Plain Monte Carlo of the same expectations. Exact Brownian paths come
/// from the Levy-Ciesielski series truncated after `truncation` Schauder
/// terms (rounded up to 2^L - 1); averages of the piecewise-linear partial
/// sum are integrated exactly cell by cell.
std::vector<McEstimate> mc_moment_oracle(const MomentSpec& spec,
                                         std::span<const MomentIndex> indices, long samples,
                                         int truncation = 1023, std::uint64_t seed = 2024);

McEstimate mc_moment_oracle(const MomentSpec& spec, const MomentIndex& idx, long samples,
                            int truncation = 1023, std::uint64_t seed = 2024);

}  // namespace shorttime
