#pragma once

#include <array>
#include <functional>
#include <span>
#include <limits>
#include <string>
#include <string_view>

#include <json.hpp>

namespace shorttime {

enum class PotentialKind { Free, Quartic, Harmonic, HeCage, Custom };

std::string_view to_string(PotentialKind kind);

struct HeCageParams {
  double epsilon = 10.22;  // K
  double sigma = 2.556;    // Angstrom
  double length = 7.153;   // Angstrom
  double mass_amu = 4.0;
};

/// One-dimensional potential with value, first derivative and the open
/// interval on which it is finite. Outside that interval value() returns
/// +infinity.
class Potential {
 public:
  using Fn = std::function<double(double)>;

  static Potential free_particle();
  /// V = x^4 / 2.
  static Potential quartic();
  /// V = m omega^2 x^2 / 2.
  static Potential harmonic(double omega, double mass = 1.0);
  /// Two Lennard-Jones walls at 0 and L, energies in K and lengths in Angstrom.
  static Potential he_cage(HeCageParams params = {});
  static Potential custom(std::string name, Fn value, Fn deriv1,
                          double lo = -std::numeric_limits<double>::infinity(),
                          double hi = std::numeric_limits<double>::infinity());

  PotentialKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  bool in_domain(double x) const noexcept { return x > lo_ && x < hi_; }

  double value(double x) const;
  double deriv1(double x) const;
  /// out[i] = value(x[i]); built-in kinds avoid the per-point indirect call.
  void values(std::span<const double> x, std::span<double> out) const;
  /// Kind-specific parameters (omega, epsilon, ...).
  const nlohmann::json& parameters() const noexcept { return params_; }

 private:
  Potential(PotentialKind kind, std::string name, Fn v, Fn d, double lo, double hi,
            nlohmann::json params)
      : kind_(kind), name_(std::move(name)), value_(std::move(v)), deriv_(std::move(d)), lo_(lo),
        hi_(hi), params_(std::move(params)) {}

  PotentialKind kind_;
  std::string name_;
  Fn value_;
  Fn deriv_;
  double lo_;
  double hi_;
  nlohmann::json params_;
  std::array<double, 3> coeff_{};  // kind-specific constants for values()
};

}  // namespace shorttime
