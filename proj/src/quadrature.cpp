#include "shorttime/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "shorttime/errors.hpp"

namespace shorttime {

namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

// Legendre P_p(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int p, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (p == 0) return {1.0, 0.0};
  for (int k = 2; k <= p; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const double dp = p * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::GaussLegendre01: return "gauss-legendre-01";
    case RuleKind::GaussHermiteProbabilist: return "gauss-hermite";
    case RuleKind::Composite: return "composite";
    case RuleKind::Custom: return "custom";
  }
  return "unknown";
}

double Rule1D::weight_sum() const noexcept {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

Rule1D gauss_legendre_01(int p) {
  require(p >= 1, Errc::invalid_argument, "gauss_legendre_01: p must be >= 1");
  Rule1D rule;
  rule.kind = RuleKind::GaussLegendre01;
  rule.points.resize(p);
  rule.weights.resize(p);
  const int half = (p + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, largest root first.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (p + 0.5));
    double dp = 1.0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      auto [pv, d] = legendre(p, x);
      dp = d;
      const double dx = pv / d;
      x -= dx;
      if (std::abs(dx) < kNewtonTol) break;
    }
    dp = legendre(p, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; store mirrored pairs so the rule is exactly palindromic.
    const double u_hi = 0.5 * (1.0 + x);
    rule.points[p - 1 - i] = u_hi;
    rule.points[i] = 1.0 - u_hi;
    rule.weights[p - 1 - i] = 0.5 * w;
    rule.weights[i] = 0.5 * w;
  }
  if (p % 2 == 1) rule.points[p / 2] = 0.5;
  return rule;
}

Rule1D gauss_hermite(int p) {
  require(p >= 1, Errc::invalid_argument, "gauss_hermite: p must be >= 1");
  // Orthonormal physicists' Hermite recurrence, roots by Newton with the
  // standard asymptotic initial guesses; then x -> sqrt(2) t, w -> w/sqrt(pi).
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  std::vector<double> t(p), w(p);
  double z = 0.0;
  const int half = (p + 1) / 2;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * p + 1.0) - 1.85575 * std::pow(2.0 * p + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(p), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * t[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * t[1];
    } else {
      z = 2.0 * z - t[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < p; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * p) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < kNewtonTol) break;
    }
    if (p % 2 == 1 && i == half - 1) z = 0.0;
    t[i] = z;
    t[p - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[p - 1 - i] = w[i];
  }
  if (p % 2 == 1) {
    // Recompute the central weight at exactly zero.
    double p1 = pim4, p2 = 0.0;
    for (int j = 0; j < p; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = -std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
    }
    const double pp = std::sqrt(2.0 * p) * p2;
    w[p / 2] = 2.0 / (pp * pp);
  }
  Rule1D rule;
  rule.kind = RuleKind::GaussHermiteProbabilist;
  rule.points.resize(p);
  rule.weights.resize(p);
  double total = 0.0;
  for (int i = 0; i < p; ++i) total += w[i];
  // t[0] is the largest root, so index p-1-i gives ascending order.
  for (int i = 0; i < p; ++i) {
    rule.points[p - 1 - i] = std::numbers::sqrt2 * t[i];
    rule.weights[p - 1 - i] = w[i] / total;
  }
  return rule;
}

Rule1D composite_01(int cells, int panel_points, EndpointMap map) {
  require(cells >= 1 && panel_points >= 1, Errc::invalid_argument,
          "composite_01: cells and panel_points must be >= 1");
  const Rule1D panel = gauss_legendre_01(panel_points);
  Rule1D rule;
  rule.kind = RuleKind::Composite;
  rule.points.reserve(static_cast<std::size_t>(cells) * panel_points);
  rule.weights.reserve(rule.points.capacity());
  const double h = 1.0 / cells;
  for (int c = 0; c < cells; ++c) {
    for (int i = 0; i < panel_points; ++i) {
      const double theta = (c + panel.points[i]) * h;
      const double wt = panel.weights[i] * h;
      if (map == EndpointMap::None) {
        rule.points.push_back(theta);
        rule.weights.push_back(wt);
      } else {
        const double s = std::sin(0.5 * std::numbers::pi * theta);
        rule.points.push_back(s * s);
        rule.weights.push_back(wt * 0.5 * std::numbers::pi * std::sin(std::numbers::pi * theta));
      }
    }
  }
  return rule;
}

Rule1D custom_rule(std::vector<double> points, std::vector<double> weights) {
  require(!points.empty() && points.size() == weights.size(), Errc::invalid_argument,
          "custom_rule: points and weights must be non-empty and of equal length");
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(std::isfinite(points[i]) && std::isfinite(weights[i]), Errc::invalid_argument,
            "custom_rule: non-finite node");
    require(weights[i] > 0.0, Errc::invalid_argument, "custom_rule: weights must be positive");
    if (i > 0)
      require(points[i] > points[i - 1], Errc::invalid_argument,
              "custom_rule: points must be strictly increasing");
  }
  return Rule1D{std::move(points), std::move(weights), RuleKind::Custom};
}

Rule1D trapezoid_endpoints() { return custom_rule({0.0, 1.0}, {0.5, 0.5}); }

bool is_palindromic(const Rule1D& rule, double tol) {
  const std::size_t n = rule.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = n - 1 - i;
    if (std::abs(rule.points[i] + rule.points[k] - 1.0) > tol) return false;
    if (std::abs(rule.weights[i] - rule.weights[k]) > tol) return false;
  }
  return true;
}

bool integrates_polynomials_on_01(const Rule1D& rule, int degree, double tol) {
  for (int d = 0; d <= degree; ++d) {
    const double q = integrate_01(rule, [d](double u) { return std::pow(u, d); });
    if (std::abs(q - 1.0 / (d + 1)) > tol) return false;
  }
  return true;
}

}  // namespace shorttime
