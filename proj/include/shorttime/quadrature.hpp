#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace shorttime {

enum class RuleKind { GaussLegendre01, GaussHermiteProbabilist, Composite, Custom };

std::string_view to_string(RuleKind kind);

/// One-dimensional quadrature rule. Points are strictly increasing and
/// weights are positive; rules never change after construction.
struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
  RuleKind kind = RuleKind::Custom;

  std::size_t size() const noexcept { return points.size(); }
  double weight_sum() const noexcept;
};

/// p-point Gauss-Legendre rule mapped to [0,1]. Exact for u^d, d <= 2p-1.
Rule1D gauss_legendre_01(int p);

/// p-point Gauss-Hermite rule for the standard normal density; weights sum to 1.
Rule1D gauss_hermite(int p);

/// Variable substitution applied inside each composite panel.
enum class EndpointMap {
  None,
  /// u = sin^2(pi*theta/2): removes sqrt(u(1-u)) endpoint singularities.
  SineSquared,
};

/// Uniform cells on [0,1] (in theta when a map is set), each carrying a
/// panel_points Gauss-Legendre panel.
Rule1D composite_01(int cells = 64, int panel_points = 8, EndpointMap map = EndpointMap::None);

/// Validated user rule: strictly increasing points, positive weights.
Rule1D custom_rule(std::vector<double> points, std::vector<double> weights);

/// Two-point endpoint rule {0, 1} with weights {1/2, 1/2}.
Rule1D trapezoid_endpoints();

template <class F>
double integrate_01(const Rule1D& rule, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(rule.points[i]);
  return sum;
}

/// u_i + u_{p+1-i} == 1 and w_i == w_{p+1-i} within tol.
bool is_palindromic(const Rule1D& rule, double tol = 1e-14);

/// True when sum_i w_i u_i^d == 1/(d+1) for every d in [0, degree].
bool integrates_polynomials_on_01(const Rule1D& rule, int degree, double tol = 1e-12);

}  // namespace shorttime
