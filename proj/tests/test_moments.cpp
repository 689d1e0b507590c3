#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "shorttime/calibration.hpp"
#include "shorttime/errors.hpp"
#include "shorttime/moments.hpp"

using namespace shorttime;

namespace {

// Number of partitions of n by brute-force recursion over the largest part.
long count_partitions(int n, int max_part) {
  if (n == 0) return 1;
  long c = 0;
  for (int p = std::min(n, max_part); p >= 1; --p) c += count_partitions(n - p, p);
  return c;
}

// Hafnian of the covariance matrix of factors at the given times, by
// expansion along the first factor.
double hafnian(std::vector<double>& times, const std::function<double(double, double)>& cov) {
  if (times.empty()) return 1.0;
  const double t0 = times.front();
  double sum = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    std::vector<double> rest;
    for (std::size_t i = 1; i < times.size(); ++i)
      if (i != k) rest.push_back(times[i]);
    sum += cov(t0, times[k]) * hafnian(rest, cov);
  }
  return sum;
}

struct Layout {
  int end_factors = 0;           // B_1 copies
  std::vector<int> per_time;     // factor count of each time variable
};

Layout layout(const std::vector<int>& j) {
  Layout l;
  l.end_factors = j.size() > 0 ? j[0] : 0;
  for (std::size_t k = 2; k < j.size(); ++k)
    for (int c = 0; c < j[k]; ++c) l.per_time.push_back(static_cast<int>(k) - 1);
  return l;
}

double integrand(const Layout& l, const std::vector<double>& t,
                 const std::function<double(double, double)>& cov) {
  std::vector<double> times(l.end_factors, 1.0);
  for (std::size_t d = 0; d < t.size(); ++d)
    for (int c = 0; c < l.per_time[d]; ++c) times.push_back(t[d]);
  if (times.size() % 2) return 0.0;
  return hafnian(times, cov);
}

// Oracle for discrete specs: direct sums over the quadrature points.
double oracle_discrete(const std::vector<int>& j, const Rule1D& rule,
                       const std::function<double(double, double)>& cov) {
  const Layout l = layout(j);
  const std::size_t d = l.per_time.size();
  std::vector<std::size_t> idx(d, 0);
  double total = 0.0;
  while (true) {
    std::vector<double> t(d);
    double w = 1.0;
    for (std::size_t a = 0; a < d; ++a) {
      t[a] = rule.points[idx[a]];
      w *= rule.weights[idx[a]];
    }
    total += w * integrand(l, t, cov);
    std::size_t a = 0;
    while (a < d && ++idx[a] == rule.size()) idx[a++] = 0;
    if (a == d) break;
  }
  return total;
}

// Oracle for exact Brownian motion with at most two time variables: the
// min kernel is polynomial on each side of the diagonal, so Gauss-Legendre
// on each triangle (Duffy map) is exact.
double oracle_brownian(const std::vector<int>& j) {
  const Layout l = layout(j);
  auto cov = [](double a, double b) { return std::min(a, b); };
  auto gl = gauss_legendre_01(12);
  if (l.per_time.empty()) return integrand(l, {}, cov);
  if (l.per_time.size() == 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i) s += gl.weights[i] * integrand(l, {gl.points[i]}, cov);
    return s;
  }
  REQUIRE(l.per_time.size() == 2);
  double s = 0.0;
  for (std::size_t a = 0; a < gl.size(); ++a)
    for (std::size_t b = 0; b < gl.size(); ++b) {
      const double outer = gl.points[a], inner = outer * gl.points[b];
      const double w = gl.weights[a] * gl.weights[b] * outer;
      s += w * (integrand(l, {inner, outer}, cov) + integrand(l, {outer, inner}, cov));
    }
  return s;
}

// Oracle for finite continuous specs: tensor sine-squared composite rule.
double oracle_finite_continuous(const std::vector<int>& j, const CovarianceKernel& c) {
  const Layout l = layout(j);
  auto rule = composite_01(l.per_time.size() <= 1 ? 48 : 24, 8, EndpointMap::SineSquared);
  return oracle_discrete(j, rule, [&](double a, double b) { return c(a, b); });
}

MomentSpec finite_spec(CalibrationFamily f) {
  const auto& r = calibrated(f);
  auto k = CovarianceKernel::finite(r.system());
  return is_discrete(f) ? MomentSpec::discrete(k, r.rule) : MomentSpec::continuous(k);
}

MomentIndex idx(int mu, std::initializer_list<std::pair<int, int>> parts) {
  return MomentIndex::from_sparse(mu, parts);
}

}  // namespace

TEST_CASE("index enumeration") {
  const long table[] = {2, 5, 11, 22};
  for (int mu = 1; mu <= 4; ++mu) CHECK(static_cast<long>(enumerate_indices(mu).size()) == table[mu - 1]);
  for (int mu = 1; mu <= 8; ++mu) {
    auto list = enumerate_indices(mu);
    CHECK(static_cast<long>(list.size()) == count_partitions(2 * mu, 2 * mu));
    std::set<std::vector<int>> seen;
    for (const auto& m : list) {
      CHECK(m.mu == mu);
      CHECK(m.j.size() == static_cast<std::size_t>(2 * mu));
      int s = 0;
      for (std::size_t k = 0; k < m.j.size(); ++k) s += static_cast<int>(k + 1) * m.j[k];
      CHECK(s == 2 * mu);
      CHECK(m.gaussian_degree() % 2 == 0);
      seen.insert(m.j);
    }
    CHECK(seen.size() == list.size());
  }
  auto one = enumerate_indices(1);
  CHECK(one[0].label() == "j2=1");
  CHECK(one[1].label() == "j1=2");
  CHECK(enumerate_indices_up_to(4).size() == 40);
  CHECK_THROWS_AS(enumerate_indices(0), Error);
  CHECK_THROWS_AS(MomentIndex::from_multiplicities({1, 1}), Error);
  CHECK(MomentIndex::from_sparse(3, {{6, 1}}).time_dimension() == 1);
  CHECK(MomentIndex::from_sparse(3, {{3, 2}}).gaussian_degree() == 2);
}

TEST_CASE("exact Brownian moments") {
  auto bm = MomentSpec::exact_brownian();
  CHECK(std::abs(moment(bm, idx(3, {{6, 1}})) - 1.0) < 1e-12);
  CHECK(std::abs(moment(bm, idx(3, {{3, 2}})) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(moment(bm, idx(4, {{4, 2}})) - 7.0 / 12.0) < 1e-12);
  CHECK(std::abs(moment(bm, idx(4, {{5, 1}, {3, 1}})) - 5.0 / 8.0) < 1e-12);
  // E[M_{2k}] = (2k-1)!! / (k+1).
  double dfact = 1.0;
  for (int k = 1; k <= 4; ++k) {
    dfact *= 2 * k - 1;
    std::vector<int> j(2 * k + 2, 0);
    j[2 * k + 1] = 1;
    CHECK(std::abs(expectation(bm, j) - dfact / (k + 1)) < 1e-11 * dfact);
  }
}

TEST_CASE("trotter moments") {
  auto tt = MomentSpec::trotter();
  CHECK(std::abs(moment(tt, idx(3, {{6, 1}})) - 1.5) < 1e-12);
  CHECK(std::abs(moment(tt, idx(3, {{3, 2}})) - 0.25) < 1e-12);
  CHECK(std::abs(moment(tt, idx(3, {{5, 1}, {1, 1}})) - 1.5) < 1e-12);
  CHECK(std::abs(moment(tt, idx(3, {{4, 1}, {1, 2}})) - 1.5) < 1e-12);
}

TEST_CASE("odd Gaussian degree gives zero") {
  const std::vector<int> j = {1, 1};
  CHECK(expectation(MomentSpec::exact_brownian(), j) == 0.0);
  CHECK(expectation(MomentSpec::trotter(), std::vector<int>{1, 0, 0, 1}) == 0.0);
  CHECK(expectation(finite_spec(CalibrationFamily::Order4Discrete), std::vector<int>{3, 0, 0, 1}) ==
        0.0);
}

TEST_CASE("exact integrator dimension bound") {
  std::vector<int> j(16, 0);
  j[0] = 1;
  j[2] = 5;  // five time variables
  try {
    expectation(MomentSpec::exact_brownian(), j);
    FAIL("expected an unsupported error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unsupported);
  }
  // Discrete specs have no such bound.
  CHECK(std::isfinite(expectation(finite_spec(CalibrationFamily::Order4Discrete), j)));
}

TEST_CASE("deterministic moments against independent pairing oracles") {
  const auto all = enumerate_indices_up_to(4);
  auto bm = MomentSpec::exact_brownian();
  for (const auto& m : all) {
    CAPTURE(m.label());
    CHECK(std::abs(moment(bm, m) - oracle_brownian(m.j)) < 1e-11);
  }
  auto tt = MomentSpec::trotter();
  auto min_cov = [](double a, double b) { return std::min(a, b); };
  for (const auto& m : all) {
    CAPTURE(m.label());
    CHECK(std::abs(moment(tt, m) - oracle_discrete(m.j, trapezoid_endpoints(), min_cov)) < 1e-12);
  }
  for (auto f : {CalibrationFamily::Order3Discrete, CalibrationFamily::Order4Discrete}) {
    auto spec = finite_spec(f);
    auto cov = [&](double a, double b) { return spec.kernel()(a, b); };
    for (const auto& m : all) {
      CAPTURE(m.label());
      CHECK(std::abs(moment(spec, m) - oracle_discrete(m.j, spec.rule(), cov)) < 1e-12);
    }
  }
  for (auto f : {CalibrationFamily::Order3Continuous, CalibrationFamily::Order4Continuous}) {
    auto spec = finite_spec(f);
    for (const auto& m : all) {
      CAPTURE(m.label());
      CHECK(std::abs(moment(spec, m) - oracle_finite_continuous(m.j, spec.kernel())) < 1e-10);
    }
  }
}

TEST_CASE("order verification") {
  SUBCASE("calibrated systems hold at their order and fail at the next") {
    for (auto f : {CalibrationFamily::Order3Continuous, CalibrationFamily::Order3Discrete,
                   CalibrationFamily::Order4Continuous, CalibrationFamily::Order4Discrete}) {
      CAPTURE(to_string(f));
      auto spec = finite_spec(f);
      const int nu = order_of(f);
      auto rep = verify_order(spec, nu);
      CHECK(rep.pass);
      CHECK(rep.max_residual < (is_discrete(f) ? 1e-10 : 1e-7));
      CHECK(rep.entries.size() == enumerate_indices_up_to(nu).size());
      auto next = verify_order(spec, nu + 1);
      CHECK_FALSE(next.pass);
      CHECK(next.max_residual > 1e-4);
    }
  }
  SUBCASE("tolerance choices") {
    CHECK(verify_order(finite_spec(CalibrationFamily::Order3Continuous), 3, 1e-7).pass);
    CHECK(verify_order(finite_spec(CalibrationFamily::Order4Discrete), 4, 1e-6).pass);
    CHECK(verify_order(finite_spec(CalibrationFamily::Order3Continuous), 1).pass);
    CHECK(default_order_tolerance(MomentSpec::trotter()) == 1e-10);
    CHECK(default_order_tolerance(finite_spec(CalibrationFamily::Order3Continuous)) == 1e-9);
  }
  SUBCASE("trotter violates exactly four identities") {
    auto rep = verify_order(MomentSpec::trotter(), 3);
    CHECK_FALSE(rep.pass);
    std::set<std::string> got;
    for (const auto& m : rep.violated()) got.insert(m.label());
    CHECK(got == std::set<std::string>{"j6=1", "j5=1,j1=1", "j4=1,j1=2", "j3=2"});
    CHECK(verify_order(MomentSpec::trotter(), 2).pass);
    auto j = to_json(rep);
    CHECK(j["violated"].size() == 4);
    CHECK(j["entries"].size() == 18);
    CHECK(j["entries"][0].contains("residual"));
    CHECK(j["entries"][0]["index"].contains("label"));
  }
}

TEST_CASE("time reversal leaves moments unchanged") {
  for (auto f : {CalibrationFamily::Order3Continuous, CalibrationFamily::Order4Continuous,
                 CalibrationFamily::Order3Discrete, CalibrationFamily::Order4Discrete}) {
    const auto& r = calibrated(f);
    auto fwd = CovarianceKernel::finite(r.system());
    auto rev = CovarianceKernel::finite(r.system().time_reversed());
    auto a = is_discrete(f) ? MomentSpec::discrete(fwd, r.rule) : MomentSpec::continuous(fwd);
    auto b = is_discrete(f) ? MomentSpec::discrete(rev, r.rule) : MomentSpec::continuous(rev);
    for (const auto& m : enumerate_indices_up_to(4)) CHECK(std::abs(moment(a, m) - moment(b, m)) < 1e-10);
  }
}

TEST_CASE("end-point-only identities hold for every averaging scheme") {
  std::vector<MomentSpec> specs = {MomentSpec::trotter(), finite_spec(CalibrationFamily::Order3Discrete),
                                   finite_spec(CalibrationFamily::Order4Continuous)};
  auto bm = MomentSpec::exact_brownian();
  for (const auto& m : enumerate_indices_up_to(3)) {
    bool only12 = true;
    for (std::size_t k = 2; k < m.j.size(); ++k) only12 = only12 && m.j[k] == 0;
    if (!only12) continue;
    for (const auto& s : specs) CHECK(std::abs(moment(s, m) - moment(bm, m)) < 1e-12);
  }
}

TEST_CASE("quartic pairing self-test") {
  std::vector<double> zeros(81, 0.0);
  auto z = isserlis_quartic_check(zeros, 3, 1000);
  CHECK(z.monte_carlo == 0.0);
  CHECK(z.pairing == 0.0);
  std::vector<double> one = {1.0};
  CHECK(isserlis_quartic_check(one, 1, 1000).pairing == 3.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> M(81);
  for (double& x : M) x = unif(rng);
  auto q = isserlis_quartic_check(M, 3);
  CHECK(q.standard_error > 0.0);
  CHECK(std::abs(q.monte_carlo - q.pairing) < 4.0 * q.standard_error);
  // Pairing sum recomputed here.
  double p = 0.0;
  auto at = [&](int a, int b, int c, int d) { return M[((a * 3 + b) * 3 + c) * 3 + d]; };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p += at(i, i, j, j) + at(i, j, i, j) + at(i, j, j, i);
  CHECK(std::abs(q.pairing - p) < 1e-12);
  CHECK_THROWS_AS(isserlis_quartic_check(M, 7), Error);
}

TEST_CASE("Monte Carlo moment oracle examples") {
  auto bm = MomentSpec::exact_brownian();
  const long n = 200'000;
  for (auto [m, exact] : {std::pair{idx(3, {{6, 1}}), 1.0}, std::pair{idx(1, {{1, 2}}), 1.0},
                          std::pair{idx(4, {{4, 2}}), 7.0 / 12.0}}) {
    auto est = mc_moment_oracle(bm, m, n);
    CAPTURE(m.label());
    CHECK(est.standard_error > 0.0);
    CHECK(std::abs(est.mean - exact) < 4.0 * est.standard_error);
  }
  // Same seed, same numbers.
  auto a = mc_moment_oracle(bm, idx(2, {{3, 1}, {1, 1}}), 5000, 255, 11);
  auto b = mc_moment_oracle(bm, idx(2, {{3, 1}, {1, 1}}), 5000, 255, 11);
  CHECK(a.mean == b.mean);
  CHECK_THROWS_AS(mc_moment_oracle(bm, idx(1, {{1, 2}}), 100, 10), Error);
}
