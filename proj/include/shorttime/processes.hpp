#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace shorttime {

enum class Symmetry { Symmetric, Antisymmetric };

struct Order3Family {
  double alpha;
};
struct Order4Family {
  double alpha1;
  double alpha2;
};
struct CustomFamily {
  std::string name;
};
using Family = std::variant<Order3Family, Order4Family, CustomFamily>;

using BridgeFunction = std::function<double(double)>;

/// Finite Gaussian path system  B(u) = sum_{k=0..q} a_k Lambda_k(u)  with
/// Lambda_0(u) = u and bridge functions Lambda_1..Lambda_q vanishing at both
/// endpoints. Bridge functions are extended by zero outside [0,1].
class LambdaSystem {
 public:
  /// q = 2: sqrt(u(1-u)) times cos / sin of alpha (u - 1/2).
  static LambdaSystem order3(double alpha);

  /// q = 3: sqrt(3) u(1-u), then r(u) times cos / sin of
  /// alpha1 (u - 1/2) + alpha2 (u - 1/2)^3 with r^2 = u(1-u)(1 - 3u(1-u)).
  static LambdaSystem order4(double alpha1, double alpha2);

  /// User-supplied bridge functions. Endpoint values and the declared
  /// symmetry of each function are checked by sampling.
  static LambdaSystem custom(std::string name, std::vector<BridgeFunction> bridge,
                             std::vector<Symmetry> symmetry);

  int q() const noexcept { return static_cast<int>(bridge_.size()); }
  const Family& family() const noexcept { return family_; }
  Symmetry symmetry(int k) const;

  /// Lambda_k(u) for 0 <= k <= q.
  double eval(int k, double u) const;

  /// Fills out[k] = Lambda_k(u) for k = 0..q; out.size() must be q+1.
  void eval_all(double u, std::span<double> out) const;

  /// Bridge functions replaced by u -> Lambda_k(1-u); Lambda_0 stays u.
  LambdaSystem time_reversed() const;

  /// max |sum_k Lambda_k(u)^2 - u| over `samples` equispaced points in [0,1].
  double variance_identity_defect(int samples = 1000) const;

 private:
  LambdaSystem(Family family, std::vector<BridgeFunction> bridge, std::vector<Symmetry> sym)
      : family_(std::move(family)), bridge_(std::move(bridge)), symmetry_(std::move(sym)) {}

  Family family_;
  std::vector<BridgeFunction> bridge_;
  std::vector<Symmetry> symmetry_;
};

/// Second-order law of a path process on [0,1].
class CovarianceKernel {
 public:
  /// C(u,v) = min(u,v): standard Brownian motion started at zero.
  static CovarianceKernel exact_brownian();
  /// C(u,v) = sum_{k=0..q} Lambda_k(u) Lambda_k(v).
  static CovarianceKernel finite(LambdaSystem system);

  bool is_exact() const noexcept { return !system_; }
  /// Null for the exact Brownian kernel.
  const LambdaSystem* system() const noexcept { return system_.get(); }

  /// Throws Errc::domain when u or v lies outside [0,1].
  double operator()(double u, double v) const;

 private:
  std::shared_ptr<const LambdaSystem> system_;
};

/// Schauder tent F_{l,j}(u) = 2^{-(l-1)/2} F_{1,1}(2^{l-1} u - j + 1);
/// l >= 1, 1 <= j <= 2^{l-1}.
double schauder(int level, int index, double u);

/// Bridge part of a composed (Levy-Ciesielski) path for n = 2^levels - 1
/// Trotter slices: Schauder levels 1..levels plus one dilated copy of the
/// finite bridge in each of the 2^levels cells. Cells are left-closed,
/// right-open, with u = 1 mapped to the last cell.
class ComposedPath {
 public:
  /// schauder_coeffs[l-1] has 2^{l-1} entries for l = 1..levels;
  /// bridge_coeffs[l-1] has 2^levels entries for l = 1..q.
  ComposedPath(LambdaSystem system, int levels, std::vector<std::vector<double>> schauder_coeffs,
               std::vector<std::vector<double>> bridge_coeffs);

  int levels() const noexcept { return levels_; }
  int slices() const noexcept { return 1 << levels_; }
  const LambdaSystem& system() const noexcept { return system_; }

  /// G_{l,j}(u) = 2^{-levels/2} Lambda_l(2^levels u - j + 1).
  double dilated_bridge(int l, int j, double u) const;

  double eval(double u) const;

 private:
  LambdaSystem system_;
  int levels_;
  std::vector<std::vector<double>> a_;
  std::vector<std::vector<double>> b_;
};

/// Cell index (1-based) of u in a uniform partition of [0,1] into `cells`.
int cell_of(double u, int cells);

}  // namespace shorttime
