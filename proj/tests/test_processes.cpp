#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "shorttime/errors.hpp"
#include "shorttime/processes.hpp"
#include "shorttime/quadrature.hpp"

using namespace shorttime;

namespace {

constexpr double kA3 = 3.056620471;
constexpr double kA41 = 5.768064999;
constexpr double kA42 = 13.49214669;

// Order-4 bridge functions written out independently of the library.
double ref_order4(int k, double u, double a1, double a2) {
  const double s = u * (1.0 - u);
  if (k == 0) return u;
  if (k == 1) return std::sqrt(3.0) * s;
  const double r = std::sqrt(s * (1.0 - 3.0 * s));
  const double t = u - 0.5;
  const double phase = a1 * t + a2 * t * t * t;
  return k == 2 ? r * std::cos(phase) : r * std::sin(phase);
}

double integral(const LambdaSystem& s, int k) {
  auto rule = composite_01(64, 8, EndpointMap::SineSquared);
  return integrate_01(rule, [&](double u) { return s.eval(k, u); });
}

// Levy-Ciesielski series of Brownian motion truncated after `terms` tents.
double levy_ciesielski_cov(double u, double v, int terms) {
  double c = u * v;
  int used = 0;
  for (int l = 1; used < terms; ++l)
    for (int j = 1; j <= (1 << (l - 1)) && used < terms; ++j, ++used)
      c += schauder(l, j, u) * schauder(l, j, v);
  return c;
}

}  // namespace

TEST_CASE("order-3 system examples") {
  for (double a : {0.0, 1.3, kA3, 7.0}) {
    auto s = LambdaSystem::order3(a);
    CHECK(s.q() == 2);
    CHECK(std::abs(s.eval(1, 0.5) - 0.5) < 1e-15);
    CHECK(std::abs(s.eval(2, 0.5)) < 1e-15);
    CHECK(std::abs(s.eval(1, 0.3) * s.eval(1, 0.3) + s.eval(2, 0.3) * s.eval(2, 0.3) - 0.21) <
          1e-14);
    CHECK(s.symmetry(1) == Symmetry::Symmetric);
    CHECK(s.symmetry(2) == Symmetry::Antisymmetric);
  }
  auto s = LambdaSystem::order3(kA3);
  const double i1 = integral(s, 1), i2 = integral(s, 2);
  CHECK(std::abs(i1 * i1 + i2 * i2 - 1.0 / 12.0) < 1e-8);
}

TEST_CASE("order-4 system examples") {
  for (auto [a1, a2] : {std::pair{0.3, -2.0}, std::pair{kA41, kA42}, std::pair{6.379716466, 8.160188248}}) {
    auto s = LambdaSystem::order4(a1, a2);
    CHECK(s.q() == 3);
    CHECK(std::abs(integral(s, 3)) < 1e-14);
    CHECK(std::abs(integral(s, 1) - std::sqrt(3.0) / 6.0) < 1e-14);
    for (double u : {0.0, 0.13, 0.5, 0.77, 1.0})
      for (int k = 0; k <= 3; ++k) CHECK(std::abs(s.eval(k, u) - ref_order4(k, u, a1, a2)) < 1e-14);
  }
  // Centroid condition at the calibrated constants.
  auto s = LambdaSystem::order4(kA41, kA42);
  CHECK(std::abs(integral(s, 0) - 0.5) < 1e-8);
  CHECK(std::abs(integral(s, 2)) < 1e-8);
}

TEST_CASE("endpoint values, time symmetry and the variance identity") {
  std::vector<LambdaSystem> systems = {LambdaSystem::order3(kA3), LambdaSystem::order3(2.720699046),
                                       LambdaSystem::order4(kA41, kA42),
                                       LambdaSystem::order4(6.379716466, 8.160188248)};
  for (const auto& s : systems) {
    CHECK(s.eval(0, 0.0) == 0.0);
    CHECK(s.eval(0, 1.0) == 1.0);
    for (int k = 1; k <= s.q(); ++k) {
      CHECK(std::abs(s.eval(k, 0.0)) < 1e-15);
      CHECK(std::abs(s.eval(k, 1.0)) < 1e-15);
      const double sign = s.symmetry(k) == Symmetry::Symmetric ? 1.0 : -1.0;
      for (int i = 0; i <= 50; ++i) {
        const double u = i / 50.0;
        CHECK(std::abs(s.eval(k, 1.0 - u) - sign * s.eval(k, u)) < 1e-14);
      }
    }
    for (int i = 0; i <= 50; ++i) {
      const double u = i / 50.0;
      CHECK(std::abs(s.eval(0, u) + s.eval(0, 1.0 - u) - 1.0) < 1e-15);
    }
    CHECK(s.variance_identity_defect(1000) < 1e-12);
    CHECK(s.time_reversed().variance_identity_defect(1000) < 1e-12);
    // Bridge functions are zero outside [0,1].
    CHECK(s.eval(1, -0.2) == 0.0);
    CHECK(s.eval(1, 1.2) == 0.0);
  }
}

TEST_CASE("custom systems verify declared symmetry") {
  auto tent = [](double u) { return std::min(u, 1.0 - u); };
  auto odd = [](double u) { return u * (1.0 - u) * (u - 0.5); };
  auto s = LambdaSystem::custom("test", {tent, odd}, {Symmetry::Symmetric, Symmetry::Antisymmetric});
  CHECK(s.q() == 2);
  CHECK(std::holds_alternative<CustomFamily>(s.family()));
  CHECK_THROWS_AS(LambdaSystem::custom("bad", {odd}, {Symmetry::Symmetric}), Error);
  CHECK_THROWS_AS(LambdaSystem::custom("bad", {[](double u) { return u; }}, {Symmetry::Symmetric}),
                  Error);
  CHECK_THROWS_AS(LambdaSystem::custom("bad", {tent}, {}), Error);
}

TEST_CASE("covariance kernels") {
  auto bm = CovarianceKernel::exact_brownian();
  CHECK(bm.is_exact());
  CHECK(bm(0.3, 0.7) == 0.3);
  CHECK(bm(1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(bm(-0.1, 0.5), Error);
  CHECK_THROWS_AS(bm(0.5, 1.5), Error);
  try {
    bm(2.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::domain);
  }

  auto c3 = CovarianceKernel::finite(LambdaSystem::order3(1.7));
  for (double u : {0.0, 0.1, 0.45, 0.9, 1.0}) CHECK(std::abs(c3(u, u) - u) < 1e-12);
  auto c4 = CovarianceKernel::finite(LambdaSystem::order4(kA41, kA42));
  CHECK(std::abs(c4(1.0, 1.0) - 1.0) < 1e-15);
  CHECK(std::abs(c3(1.0, 1.0) - 1.0) < 1e-15);
  CHECK(c4(0.2, 0.6) == doctest::Approx(c4(0.6, 0.2)).epsilon(1e-15));
}

TEST_CASE("covariance against series oracles") {
  // The finite system's own series has q+1 nonzero terms; padding to 200 is exact.
  auto c4 = CovarianceKernel::finite(LambdaSystem::order4(kA41, kA42));
  double series = 0.0;
  for (int k = 0; k < 200; ++k)
    if (k <= 3) series += ref_order4(k, 0.25, kA41, kA42) * ref_order4(k, 0.75, kA41, kA42);
  CHECK(std::abs(c4(0.25, 0.75) - series) < 1e-3);
  CHECK(std::abs(c4(0.25, 0.75) - series) < 1e-14);

  // Brownian motion against its 200-term Levy-Ciesielski truncation.
  auto bm = CovarianceKernel::exact_brownian();
  for (auto [u, v] : {std::pair{0.25, 0.75}, std::pair{0.3, 0.7}, std::pair{0.3, 0.3}, std::pair{0.61, 0.64}})
    CHECK(std::abs(bm(u, v) - levy_ciesielski_cov(u, v, 200)) < 1e-3);
}

TEST_CASE("finite covariance matrices are positive semidefinite") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& s : {LambdaSystem::order3(kA3), LambdaSystem::order4(kA41, kA42),
                        LambdaSystem::order4(6.379716466, 8.160188248)}) {
    auto c = CovarianceKernel::finite(s);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd K(10, 10);
      double t[10];
      for (double& x : t) x = unif(rng);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) K(i, j) = c(t[i], t[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
  }
}

TEST_CASE("schauder tents") {
  CHECK(schauder(1, 1, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(schauder(2, 1, 0.25) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(schauder(2, 1, 0.25) - 0.353553) < 1e-6);
  CHECK(schauder(3, 4, 0.1) == 0.0);
  CHECK(schauder(1, 1, 0.0) == 0.0);
  CHECK(schauder(1, 1, 1.0) == 0.0);
  CHECK_THROWS_AS(schauder(3, 5, 0.1), Error);
  CHECK_THROWS_AS(schauder(0, 1, 0.1), Error);
  CHECK_THROWS_AS(schauder(2, 0, 0.1), Error);
}

TEST_CASE("cell convention") {
  CHECK(cell_of(0.0, 4) == 1);
  CHECK(cell_of(0.25, 4) == 2);
  CHECK(cell_of(0.2499, 4) == 1);
  CHECK(cell_of(1.0, 4) == 4);
  CHECK(cell_of(0.999, 4) == 4);
}

TEST_CASE("composed paths") {
  auto sys = LambdaSystem::order4(kA41, kA42);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  auto random_path = [&](int k) {
    std::vector<std::vector<double>> a(k), b(sys.q());
    for (int l = 1; l <= k; ++l)
      for (int j = 0; j < (1 << (l - 1)); ++j) a[l - 1].push_back(normal(rng));
    for (auto& row : b)
      for (int j = 0; j < (1 << k); ++j) row.push_back(normal(rng));
    return ComposedPath(sys, k, a, b);
  };

  SUBCASE("zero coefficients give zero") {
    ComposedPath p(sys, 2, {{0.0}, {0.0, 0.0}}, std::vector<std::vector<double>>(3, std::vector<double>(4, 0.0)));
    for (double u : {0.0, 0.2, 0.5, 0.99, 1.0}) CHECK(p.eval(u) == 0.0);
  }
  SUBCASE("endpoints vanish and the path is continuous") {
    for (int k = 0; k <= 4; ++k) {
      auto p = random_path(k);
      CHECK(std::abs(p.eval(0.0)) < 1e-14);
      CHECK(std::abs(p.eval(1.0)) < 1e-14);
      for (int c = 1; c < p.slices(); ++c) {
        const double u = static_cast<double>(c) / p.slices();
        // Bridge functions behave like sqrt(u) at cell edges.
        for (double eps : {1e-8, 1e-12})
          CHECK(std::abs(p.eval(u - eps) - p.eval(u)) < 20.0 * std::sqrt(eps));
      }
    }
  }
  SUBCASE("k = 0 is the undilated bridge") {
    ComposedPath p(sys, 0, {}, {{0.4}, {-1.1}, {2.0}});
    for (double u : {0.1, 0.37, 0.5, 0.8}) {
      const double direct = 0.4 * sys.eval(1, u) - 1.1 * sys.eval(2, u) + 2.0 * sys.eval(3, u);
      CHECK(std::abs(p.eval(u) - direct) < 1e-15);
    }
  }
  SUBCASE("size mismatches are rejected") {
    CHECK_THROWS_AS(ComposedPath(sys, 1, {}, {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}), Error);
    CHECK_THROWS_AS(ComposedPath(sys, 1, {{0.0}}, {{0.0}, {0.0}, {0.0}}), Error);
    CHECK_THROWS_AS(ComposedPath(sys, 1, {{0.0}}, {{0.0, 0.0}, {0.0, 0.0}}), Error);
  }
}

TEST_CASE("composed path sample covariance matches the dilated kernel") {
  auto sys = LambdaSystem::order3(kA3);
  const int k = 2;
  // Oracle: sum over tents of F F plus sum over cells of G G.
  auto kernel = [&](double u, double v) {
    double c = 0.0;
    for (int l = 1; l <= k; ++l)
      for (int j = 1; j <= (1 << (l - 1)); ++j) c += schauder(l, j, u) * schauder(l, j, v);
    const int cu = cell_of(u, 1 << k), cv = cell_of(v, 1 << k);
    if (cu == cv) {
      const double s = std::ldexp(1.0, k);
      for (int l = 1; l <= sys.q(); ++l)
        c += sys.eval(l, s * u - cu + 1) * sys.eval(l, s * v - cv + 1) / s;
    }
    return c;
  };
  const std::pair<double, double> pairs[5] = {{0.1, 0.2}, {0.3, 0.3}, {0.2, 0.7}, {0.55, 0.6}, {0.9, 0.95}};
  double sum[5] = {}, sum2[5] = {};
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  const long n = 1'000'000;
  std::vector<std::vector<double>> a(k), b(sys.q(), std::vector<double>(1 << k));
  for (int l = 1; l <= k; ++l) a[l - 1].resize(1 << (l - 1));
  for (long s = 0; s < n; ++s) {
    for (auto& row : a)
      for (double& x : row) x = normal(rng);
    for (auto& row : b)
      for (double& x : row) x = normal(rng);
    ComposedPath p(sys, k, a, b);
    for (int i = 0; i < 5; ++i) {
      const double prod = p.eval(pairs[i].first) * p.eval(pairs[i].second);
      sum[i] += prod;
      sum2[i] += prod * prod;
    }
  }
  for (int i = 0; i < 5; ++i) {
    const double mean = sum[i] / n;
    const double se = std::sqrt((sum2[i] / n - mean * mean) / n);
    const double expect = kernel(pairs[i].first, pairs[i].second);
    CAPTURE(i);
    CHECK(std::abs(mean - expect) < 3.0 * se + 1e-15);
  }
}
