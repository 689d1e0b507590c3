#include "shorttime/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "shorttime/errors.hpp"

namespace shorttime {

namespace {
// CODATA 2018.
constexpr double kHbar = 1.054571817e-34;      // J s
constexpr double kAmu = 1.66053906660e-27;     // kg
constexpr double kBoltzmann = 1.380649e-23;    // J / K
constexpr double kAngstrom = 1e-10;            // m
}  // namespace

double PhysicalParams::sigma() const {
  validate();
  return std::sqrt(hbar * hbar * beta / mass);
}

void PhysicalParams::validate() const {
  require(hbar > 0.0 && mass > 0.0 && beta > 0.0 && std::isfinite(hbar) && std::isfinite(mass) &&
              std::isfinite(beta),
          Errc::invalid_argument, "PhysicalParams: hbar, mass and beta must be positive and finite");
}

double units_constant() {
  return kHbar * kHbar / (kAmu * kAngstrom * kAngstrom * kBoltzmann);
}

PhysicalParams kelvin_angstrom_params(double mass_amu, double beta_per_kelvin) {
  return {1.0, mass_amu / units_constant(), beta_per_kelvin};
}

double rho_fp(const PhysicalParams& params, double x, double xp) {
  const double s2 = params.sigma() * params.sigma();
  const double d = xp - x;
  return std::exp(-d * d / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2);
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::FreeParticle: return "free";
    case KernelKind::Trotter: return "trotter";
    case KernelKind::ContinuousReweighted: return "continuous";
    case KernelKind::DiscreteReweighted: return "discrete";
  }
  return "unknown";
}

ShortTimeKernel ShortTimeKernel::free_particle(Potential potential) {
  return ShortTimeKernel(KernelKind::FreeParticle, std::move(potential));
}

ShortTimeKernel ShortTimeKernel::trotter(Potential potential) {
  ShortTimeKernel k(KernelKind::Trotter, std::move(potential));
  k.time_rule_ = trapezoid_endpoints();
  return k;
}

ShortTimeKernel ShortTimeKernel::continuous(LambdaSystem system, Potential potential,
                                            int gh_points, std::optional<Rule1D> time_rule) {
  require(gh_points >= 1 && gh_points <= 40, Errc::invalid_argument,
          "kernel: gh_points must lie in [1,40]");
  ShortTimeKernel k(KernelKind::ContinuousReweighted, std::move(potential));
  k.system_ = std::make_shared<const LambdaSystem>(std::move(system));
  k.time_rule_ = time_rule ? std::move(*time_rule) : composite_01(16, 8, EndpointMap::SineSquared);
  k.gh_points_ = gh_points;
  k.build_tables();
  return k;
}

ShortTimeKernel ShortTimeKernel::discrete(LambdaSystem system, Rule1D rule, Potential potential,
                                          int gh_points) {
  require(gh_points >= 1 && gh_points <= 40, Errc::invalid_argument,
          "kernel: gh_points must lie in [1,40]");
  require(std::abs(rule.weight_sum() - 1.0) < 1e-14, Errc::invalid_argument,
          "kernel: time weights must sum to 1");
  ShortTimeKernel k(KernelKind::DiscreteReweighted, std::move(potential));
  k.system_ = std::make_shared<const LambdaSystem>(std::move(system));
  k.time_rule_ = std::move(rule);
  k.gh_points_ = gh_points;
  k.build_tables();
  return k;
}

void ShortTimeKernel::build_tables() {
  const int q = system_->q();
  const Rule1D gh = gauss_hermite(gh_points_);
  const std::size_t nt = time_rule_.size();
  std::vector<double> lam(static_cast<std::size_t>(q + 1) * nt);
  std::vector<double> row(q + 1);
  for (std::size_t i = 0; i < nt; ++i) {
    system_->eval_all(time_rule_.points[i], row);
    for (int k = 0; k <= q; ++k) lam[k * nt + i] = row[k];
  }
  std::size_t nodes = 1;
  for (int k = 0; k < q; ++k) nodes *= gh.size();
  node_weights_.assign(nodes, 1.0);
  profiles_.assign(nodes * nt, 0.0);
  std::vector<std::size_t> digit(q, 0);
  for (std::size_t g = 0; g < nodes; ++g) {
    std::size_t rest = g;
    for (int k = 0; k < q; ++k) {
      digit[k] = rest % gh.size();
      rest /= gh.size();
      node_weights_[g] *= gh.weights[digit[k]];
    }
    for (std::size_t i = 0; i < nt; ++i) {
      double s = 0.0;
      for (int k = 0; k < q; ++k) s += gh.points[digit[k]] * lam[(k + 1) * nt + i];
      profiles_[g * nt + i] = s;
    }
  }
}

double ShortTimeKernel::ratio(const PhysicalParams& params, double x, double xp) const {
  const double beta = params.beta;
  auto nan_error = [&](double v) {
    if (std::isnan(v)) {
      std::ostringstream os;
      os << "kernel: potential returned NaN on the path from x=" << x << " to x'=" << xp;
      fail(Errc::numerical, os.str());
    }
  };
  switch (kind_) {
    case KernelKind::FreeParticle: return 1.0;
    case KernelKind::Trotter: {
      const double v = potential_.value(x) + potential_.value(xp);
      nan_error(v);
      return std::isinf(v) ? 0.0 : std::exp(-0.5 * beta * v);
    }
    case KernelKind::ContinuousReweighted:
    case KernelKind::DiscreteReweighted: break;
  }
  const double sigma = params.sigma();
  const std::size_t nt = time_rule_.size();
  const double* u = time_rule_.points.data();
  const double* w = time_rule_.weights.data();
  const double dx = xp - x;
  const std::size_t ng = node_weights_.size();
  thread_local std::vector<double> pts, vals;
  pts.resize(ng * nt);
  vals.resize(ng * nt);
  for (std::size_t g = 0; g < ng; ++g) {
    const double* prof = profiles_.data() + g * nt;
    double* row = pts.data() + g * nt;
    for (std::size_t i = 0; i < nt; ++i) row[i] = x + dx * u[i] + sigma * prof[i];
  }
  potential_.values(pts, vals);
  double total = 0.0;
  for (std::size_t g = 0; g < ng; ++g) {
    const double* row = vals.data() + g * nt;
    double avg = 0.0;
    for (std::size_t i = 0; i < nt; ++i) avg += w[i] * row[i];
    nan_error(avg);
    if (std::isinf(avg)) continue;
    total += node_weights_[g] * std::exp(-beta * avg);
  }
  return total;
}

double ShortTimeKernel::rho0(const PhysicalParams& params, double x, double xp) const {
  const double r = ratio(params, x, xp);
  return r == 0.0 ? 0.0 : rho_fp(params, x, xp) * r;
}

}  // namespace shorttime
