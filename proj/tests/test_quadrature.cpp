#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shorttime/errors.hpp"
#include "shorttime/quadrature.hpp"

using namespace shorttime;

namespace {

// E[a^d] for a standard normal, from the Gamma function.
double normal_moment(int d) {
  if (d % 2) return 0.0;
  return std::pow(2.0, d / 2.0) * std::tgamma((d + 1) / 2.0) / std::sqrt(std::numbers::pi);
}

}  // namespace

TEST_CASE("gauss_legendre_01 tabulated nodes") {
  auto r2 = gauss_legendre_01(2);
  REQUIRE(r2.size() == 2);
  CHECK(r2.points[0] == doctest::Approx(0.211324865).epsilon(1e-9));
  CHECK(r2.points[1] == doctest::Approx(0.788675135).epsilon(1e-9));
  CHECK(r2.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r2.weights[1] == doctest::Approx(0.5).epsilon(1e-15));

  auto r4 = gauss_legendre_01(4);
  const double p4[] = {0.069431844, 0.330009478, 0.669990522, 0.930568156};
  const double w4[] = {0.173927423, 0.326072577, 0.326072577, 0.173927423};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(r4.points[i] - p4[i]) < 1e-9);
    CHECK(std::abs(r4.weights[i] - w4[i]) < 1e-9);
  }

  auto r1 = gauss_legendre_01(1);
  REQUIRE(r1.size() == 1);
  CHECK(r1.points[0] == 0.5);
  CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r1.kind == RuleKind::GaussLegendre01);
}

TEST_CASE("gauss_legendre_01 is exact up to degree 2p-1 and palindromic") {
  for (int p = 1; p <= 24; ++p) {
    auto r = gauss_legendre_01(p);
    CHECK(is_palindromic(r));
    for (std::size_t i = 0; i + 1 < r.size(); ++i) CHECK(r.points[i] < r.points[i + 1]);
    for (double w : r.weights) CHECK(w > 0.0);
    for (int d = 0; d <= 2 * p - 1; ++d) {
      const double exact = 1.0 / (d + 1);
      const double got = integrate_01(r, [d](double u) { return std::pow(u, d); });
      CHECK(std::abs(got - exact) / exact < 1e-13);
    }
  }
}

TEST_CASE("gauss_hermite moments against the Gamma-function oracle") {
  auto r1 = gauss_hermite(1);
  REQUIRE(r1.size() == 1);
  CHECK(r1.points[0] == 0.0);
  CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  auto r10 = gauss_hermite(10);
  CHECK(std::abs(r10.weight_sum() - 1.0) < 1e-14);
  CHECK(std::abs(integrate_01(r10, [](double a) { return a * a; }) - 1.0) < 1e-13);
  CHECK(std::abs(integrate_01(r10, [](double a) { return a * a * a * a; }) - 3.0) < 1e-12);

  for (int p = 1; p <= 16; ++p) {
    auto r = gauss_hermite(p);
    for (int d = 0; d <= 2 * p - 1; ++d) {
      const double exact = normal_moment(d);
      const double got = integrate_01(r, [d](double a) { return std::pow(a, d); });
      // Odd moments cancel between mirrored nodes; roundoff scales with sum w |x|^d.
      const double scale = integrate_01(r, [d](double a) { return std::pow(std::abs(a), d); });
      CHECK(std::abs(got - exact) <= 1e-13 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("tensor Gauss-Hermite integrates multivariate polynomials") {
  const int p = 5;
  auto r = gauss_hermite(p);
  // E[a^4 b^2 c^9] and E[a^2 b^6 c^8] over three independent normals.
  const int degs[2][3] = {{4, 2, 9}, {2, 6, 8}};
  for (const auto& dg : degs) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < r.size(); ++j)
        for (std::size_t k = 0; k < r.size(); ++k)
          sum += r.weights[i] * r.weights[j] * r.weights[k] * std::pow(r.points[i], dg[0]) *
                 std::pow(r.points[j], dg[1]) * std::pow(r.points[k], dg[2]);
    const double exact = normal_moment(dg[0]) * normal_moment(dg[1]) * normal_moment(dg[2]);
    CHECK(std::abs(sum - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("integrate_01 examples") {
  CHECK(std::abs(integrate_01(gauss_legendre_01(2), [](double u) { return u * u; }) - 1.0 / 3.0) <
        1e-14);
  for (const auto& r : {gauss_legendre_01(3), composite_01(), composite_01(16, 8, EndpointMap::SineSquared)})
    CHECK(std::abs(integrate_01(r, [](double) { return 1.0; }) - 1.0) < 1e-14);
  const double v = integrate_01(composite_01(64, 8), [](double u) { return u * (1.0 - u); });
  CHECK(std::abs(v - 1.0 / 6.0) < 1e-13);
}

TEST_CASE("sine-squared composite handles square-root endpoints") {
  // integral of sqrt(u(1-u)) over [0,1] is pi/8.
  auto plain = composite_01(64, 8);
  auto mapped = composite_01(64, 8, EndpointMap::SineSquared);
  auto f = [](double u) { return std::sqrt(u * (1.0 - u)); };
  const double exact = std::numbers::pi / 8.0;
  CHECK(std::abs(integrate_01(mapped, f) - exact) < 1e-14);
  CHECK(std::abs(integrate_01(plain, f) - exact) > 1e-8);
  CHECK(is_palindromic(mapped));
  CHECK(mapped.kind == RuleKind::Composite);
}

TEST_CASE("rule validation") {
  CHECK_THROWS_AS(gauss_legendre_01(0), Error);
  CHECK_THROWS_AS(gauss_hermite(0), Error);
  CHECK_THROWS_AS(composite_01(0, 8), Error);
  CHECK_THROWS_AS(custom_rule({0.5, 0.2}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(custom_rule({0.2, 0.5}, {1.0, -0.1}), Error);
  CHECK_THROWS_AS(custom_rule({0.2}, {0.5, 0.5}), Error);
  auto t = trapezoid_endpoints();
  CHECK(t.points == std::vector<double>{0.0, 1.0});
  CHECK(is_palindromic(t));
  CHECK(integrates_polynomials_on_01(t, 1));
  CHECK_FALSE(integrates_polynomials_on_01(t, 2));
  CHECK(integrates_polynomials_on_01(gauss_legendre_01(2), 3));
  CHECK_FALSE(integrates_polynomials_on_01(gauss_legendre_01(2), 4));
  CHECK_FALSE(is_palindromic(custom_rule({0.1, 0.5}, {0.5, 0.5})));
}
