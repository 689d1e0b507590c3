#include "shorttime/potentials.hpp"

#include <cmath>

#include "shorttime/errors.hpp"

namespace shorttime {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Free: return "free";
    case PotentialKind::Quartic: return "quartic";
    case PotentialKind::Harmonic: return "harmonic";
    case PotentialKind::HeCage: return "he-cage";
    case PotentialKind::Custom: return "custom";
  }
  return "unknown";
}

Potential Potential::free_particle() {
  return Potential(PotentialKind::Free, "free", [](double) { return 0.0; },
                   [](double) { return 0.0; }, -kInf, kInf, nlohmann::json::object());
}

Potential Potential::quartic() {
  return Potential(
      PotentialKind::Quartic, "quartic", [](double x) { return 0.5 * x * x * x * x; },
      [](double x) { return 2.0 * x * x * x; }, -kInf, kInf, nlohmann::json::object());
}

Potential Potential::harmonic(double omega, double mass) {
  require(omega > 0.0 && mass > 0.0, Errc::invalid_argument,
          "harmonic: omega and mass must be positive");
  const double k = mass * omega * omega;
  Potential pot(
      PotentialKind::Harmonic, "harmonic", [k](double x) { return 0.5 * k * x * x; },
      [k](double x) { return k * x; }, -kInf, kInf, {{"omega", omega}, {"mass", mass}});
  pot.coeff_ = {k, 0.0, 0.0};
  return pot;
}

Potential Potential::he_cage(HeCageParams p) {
  require(p.epsilon > 0.0 && p.sigma > 0.0 && p.length > 0.0 && p.mass_amu > 0.0,
          Errc::invalid_argument, "he_cage: parameters must be positive");
  // Each wall contributes 4 eps [s^12 - s^6], s = sigma / distance.
  auto wall = [p](double d) {
    const double s2 = (p.sigma / d) * (p.sigma / d);
    const double s6 = s2 * s2 * s2;
    return 4.0 * p.epsilon * (s6 * s6 - s6);
  };
  auto wall_d = [p](double d) {  // d/dd of wall(d)
    const double s2 = (p.sigma / d) * (p.sigma / d);
    const double s6 = s2 * s2 * s2;
    return 4.0 * p.epsilon * (-12.0 * s6 * s6 + 6.0 * s6) / d;
  };
  const double L = p.length;
  Potential pot(
      PotentialKind::HeCage, "he-cage",
      [=](double x) { return (x > 0.0 && x < L) ? wall(x) + wall(L - x) : kInf; },
      [=](double x) { return (x > 0.0 && x < L) ? wall_d(x) - wall_d(L - x) : kInf; }, 0.0, L,
      {{"epsilon", p.epsilon}, {"sigma", p.sigma}, {"length", p.length}, {"mass_amu", p.mass_amu}});
  pot.coeff_ = {p.epsilon, p.sigma, p.length};
  return pot;
}

Potential Potential::custom(std::string name, Fn value, Fn deriv1, double lo, double hi) {
  require(static_cast<bool>(value) && static_cast<bool>(deriv1), Errc::invalid_argument,
          "custom potential: value and derivative are required");
  require(lo < hi, Errc::invalid_argument, "custom potential: empty domain");
  return Potential(PotentialKind::Custom, std::move(name), std::move(value), std::move(deriv1), lo,
                   hi, nlohmann::json::object());
}

double Potential::value(double x) const { return in_domain(x) ? value_(x) : kInf; }

double Potential::deriv1(double x) const {
  require(in_domain(x), Errc::domain, "Potential::deriv1: x outside the potential's domain");
  return deriv_(x);
}

void Potential::values(std::span<const double> x, std::span<double> out) const {
  require(x.size() == out.size(), Errc::invalid_argument, "Potential::values: size mismatch");
  const std::size_t n = x.size();
  switch (kind_) {
    case PotentialKind::Free:
      for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
      return;
    case PotentialKind::Quartic:
      for (std::size_t i = 0; i < n; ++i) {
        const double x2 = x[i] * x[i];
        out[i] = 0.5 * x2 * x2;
      }
      return;
    case PotentialKind::Harmonic:
      for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * coeff_[0] * x[i] * x[i];
      return;
    case PotentialKind::HeCage: {
      const double eps4 = 4.0 * coeff_[0], sig2 = coeff_[1] * coeff_[1], L = coeff_[2];
      for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i];
        const double b = L - a;
        const double sa = sig2 / (a * a), sb = sig2 / (b * b);
        const double a6 = sa * sa * sa, b6 = sb * sb * sb;
        const double v = eps4 * (a6 * a6 - a6 + b6 * b6 - b6);
        out[i] = (a > 0.0 && b > 0.0) ? v : kInf;
      }
      return;
    }
    case PotentialKind::Custom:
      for (std::size_t i = 0; i < n; ++i) out[i] = value(x[i]);
      return;
  }
}

}  // namespace shorttime
