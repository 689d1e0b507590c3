#include "shorttime/moments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "shorttime/errors.hpp"

namespace shorttime {

// ---------------------------------------------------------------------------
// Indices
// ---------------------------------------------------------------------------

MomentIndex MomentIndex::from_multiplicities(std::vector<int> j) {
  require(!j.empty() && j.size() % 2 == 0, Errc::invalid_argument,
          "MomentIndex: need 2*mu multiplicities");
  int total = 0;
  for (std::size_t k = 0; k < j.size(); ++k) {
    require(j[k] >= 0, Errc::invalid_argument, "MomentIndex: negative multiplicity");
    total += static_cast<int>(k + 1) * j[k];
  }
  require(total == static_cast<int>(j.size()), Errc::invalid_argument,
          "MomentIndex: sum_k k*j_k must equal 2*mu");
  MomentIndex idx;
  idx.mu = static_cast<int>(j.size() / 2);
  idx.j = std::move(j);
  return idx;
}

MomentIndex MomentIndex::from_sparse(int mu, std::initializer_list<std::pair<int, int>> parts) {
  require(mu >= 1, Errc::invalid_argument, "MomentIndex: mu must be >= 1");
  std::vector<int> j(2 * mu, 0);
  for (auto [k, count] : parts) {
    require(k >= 1 && k <= 2 * mu, Errc::invalid_argument, "MomentIndex: component out of range");
    j[k - 1] = count;
  }
  return from_multiplicities(std::move(j));
}

int MomentIndex::gaussian_degree() const {
  int g = j.empty() ? 0 : j[0];
  for (std::size_t k = 2; k < j.size(); ++k) g += static_cast<int>(k - 1) * j[k];
  return g;
}

int MomentIndex::time_dimension() const {
  int d = 0;
  for (std::size_t k = 2; k < j.size(); ++k) d += j[k];
  return d;
}

std::string MomentIndex::label() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = j.size(); k-- > 0;) {
    if (j[k] == 0) continue;
    if (!first) os << ',';
    os << 'j' << (k + 1) << '=' << j[k];
    first = false;
  }
  return os.str();
}

namespace {

void partitions(int remaining, int max_part, std::vector<int>& current,
                std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 1; --part) {
    current.push_back(part);
    partitions(remaining - part, part, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<MomentIndex> enumerate_indices(int mu) {
  require(mu >= 1 && mu <= 8, Errc::invalid_argument, "enumerate_indices: mu must be in [1,8]");
  std::vector<std::vector<int>> parts;
  std::vector<int> current;
  partitions(2 * mu, 2 * mu, current, parts);
  std::vector<MomentIndex> out;
  out.reserve(parts.size());
  for (const auto& p : parts) {
    std::vector<int> j(2 * mu, 0);
    for (int part : p) ++j[part - 1];
    out.push_back(MomentIndex::from_multiplicities(std::move(j)));
  }
  return out;
}

std::vector<MomentIndex> enumerate_indices_up_to(int nu) {
  std::vector<MomentIndex> out;
  for (int mu = 1; mu <= nu; ++mu) {
    auto block = enumerate_indices(mu);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

MomentSpec MomentSpec::exact_brownian() {
  return MomentSpec(CovarianceKernel::exact_brownian(), ContinuousAverage{});
}

MomentSpec MomentSpec::continuous(CovarianceKernel kernel) {
  return MomentSpec(std::move(kernel), ContinuousAverage{});
}

MomentSpec MomentSpec::discrete(CovarianceKernel kernel, Rule1D rule) {
  require(rule.size() > 0, Errc::invalid_argument, "MomentSpec: empty rule");
  require(std::abs(rule.weight_sum() - 1.0) < 1e-14, Errc::invalid_argument,
          "MomentSpec: quadrature weights must sum to 1");
  for (double u : rule.points)
    require(u >= 0.0 && u <= 1.0, Errc::domain, "MomentSpec: quadrature points must lie in [0,1]");
  return MomentSpec(std::move(kernel), DiscreteAverage{std::move(rule)});
}

MomentSpec MomentSpec::trotter() {
  return discrete(CovarianceKernel::exact_brownian(), trapezoid_endpoints());
}

const Rule1D& MomentSpec::rule() const {
  require(is_discrete(), Errc::invalid_argument, "MomentSpec::rule: continuous spec has no rule");
  return std::get<DiscreteAverage>(average_).rule;
}

// ---------------------------------------------------------------------------
// Isserlis pairing
// ---------------------------------------------------------------------------

namespace {

using PairList = std::vector<std::pair<int, int>>;

struct PairingTerm {
  double coefficient;
  PairList pairs;  // group ids, a <= b
};

// All perfect matchings of the labelled factors, merged by the multiset of
// group pairs they produce.
std::vector<PairingTerm> pairing_terms(const std::vector<int>& factor_groups) {
  std::map<PairList, long> counts;
  const int g = static_cast<int>(factor_groups.size());
  std::vector<bool> used(g, false);
  PairList current;
  auto recurse = [&](auto&& self) -> void {
    int first = -1;
    for (int i = 0; i < g; ++i)
      if (!used[i]) {
        first = i;
        break;
      }
    if (first < 0) {
      PairList key = current;
      std::sort(key.begin(), key.end());
      ++counts[key];
      return;
    }
    used[first] = true;
    for (int k = first + 1; k < g; ++k) {
      if (used[k]) continue;
      used[k] = true;
      const int a = factor_groups[first];
      const int b = factor_groups[k];
      current.emplace_back(std::min(a, b), std::max(a, b));
      self(self);
      current.pop_back();
      used[k] = false;
    }
    used[first] = false;
  };
  recurse(recurse);
  std::vector<PairingTerm> terms;
  terms.reserve(counts.size());
  for (auto& [pairs, c] : counts) terms.push_back({static_cast<double>(c), pairs});
  return terms;
}

struct FactorLayout {
  std::vector<int> factor_groups;  // group 0 is the end point u = 1
  int dims = 0;                    // time variables, groups 1..dims
};

FactorLayout layout_of(std::span<const int> j) {
  FactorLayout layout;
  if (!j.empty())
    for (int i = 0; i < j[0]; ++i) layout.factor_groups.push_back(0);
  for (std::size_t k = 2; k < j.size(); ++k) {
    const int power = static_cast<int>(k) - 1;  // j_{k+1} counts M_{k-1}
    for (int rep = 0; rep < j[k]; ++rep) {
      ++layout.dims;
      for (int f = 0; f < power; ++f) layout.factor_groups.push_back(layout.dims);
    }
  }
  return layout;
}

// Tensor-product sum over node tables; node index `end_node` is u = 1.
double tensor_sum(const std::vector<PairingTerm>& terms, int dims, const std::vector<double>& nodes,
                  const std::vector<double>& weights,
                  const std::vector<std::vector<double>>& cov) {
  const int n = static_cast<int>(nodes.size());
  const int end_node = n;
  std::vector<int> node_of(dims + 1, 0);
  node_of[0] = end_node;
  std::vector<int> counter(dims, 0);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int d = 0; d < dims; ++d) {
      node_of[d + 1] = counter[d];
      w *= weights[counter[d]];
    }
    double value = 0.0;
    for (const auto& term : terms) {
      double prod = term.coefficient;
      for (auto [a, b] : term.pairs) prod *= cov[node_of[a]][node_of[b]];
      value += prod;
    }
    total += w * value;
    int d = 0;
    while (d < dims && ++counter[d] == n) counter[d++] = 0;
    if (d == dims) break;
  }
  return total;
}

std::vector<std::vector<double>> covariance_table(const CovarianceKernel& kernel,
                                                  const std::vector<double>& nodes) {
  std::vector<double> all = nodes;
  all.push_back(1.0);
  const std::size_t n = all.size();
  std::vector<std::vector<double>> cov(n, std::vector<double>(n));
  if (kernel.is_exact()) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) cov[a][b] = std::min(all[a], all[b]);
    return cov;
  }
  const LambdaSystem& sys = *kernel.system();
  std::vector<std::vector<double>> lam(n, std::vector<double>(sys.q() + 1));
  for (std::size_t a = 0; a < n; ++a) sys.eval_all(all[a], lam[a]);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      double s = 0.0;
      for (int k = 0; k <= sys.q(); ++k) s += lam[a][k] * lam[b][k];
      cov[a][b] = cov[b][a] = s;
    }
  return cov;
}

// Nodes of the ordered simplex 0 < s_1 < ... < s_d < 1 by collapsed
// Gauss-Legendre products; exact for the polynomial integrands that arise
// from the min kernel on each ordering.
void simplex_nodes(int dims, const Rule1D& gl, std::vector<std::vector<double>>& pts,
                   std::vector<double>& wts) {
  pts.clear();
  wts.clear();
  std::vector<double> s(dims);
  auto recurse = [&](auto&& self, int level, double upper, double weight) -> void {
    if (level < 0) {
      pts.push_back(s);
      wts.push_back(weight);
      return;
    }
    for (std::size_t i = 0; i < gl.size(); ++i) {
      s[level] = upper * gl.points[i];
      self(self, level - 1, s[level], weight * upper * gl.weights[i]);
    }
  };
  recurse(recurse, dims - 1, 1.0, 1.0);
}

double exact_continuous(const std::vector<PairingTerm>& terms, int dims) {
  if (dims == 0) {
    double v = 0.0;
    for (const auto& t : terms) v += t.coefficient;  // C(1,1) = 1
    return v;
  }
  static const Rule1D gl = gauss_legendre_01(8);
  std::vector<std::vector<double>> pts;
  std::vector<double> wts;
  simplex_nodes(dims, gl, pts, wts);
  std::vector<int> perm(dims);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> time_of(dims + 1, 1.0);
  double total = 0.0;
  do {
    for (std::size_t p = 0; p < pts.size(); ++p) {
      for (int i = 0; i < dims; ++i) time_of[perm[i] + 1] = pts[p][i];
      double value = 0.0;
      for (const auto& term : terms) {
        double prod = term.coefficient;
        for (auto [a, b] : term.pairs) prod *= std::min(time_of[a], time_of[b]);
        value += prod;
      }
      total += wts[p] * value;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

Rule1D continuous_rule_for(int dims) {
  // Total work stays near a few million tuples.
  switch (dims) {
    case 0:
    case 1: return composite_01(64, 8, EndpointMap::SineSquared);
    case 2: return composite_01(32, 8, EndpointMap::SineSquared);
    case 3: return composite_01(16, 8, EndpointMap::SineSquared);
    default: return composite_01(8, 8, EndpointMap::SineSquared);
  }
}

}  // namespace

double expectation(const MomentSpec& spec, std::span<const int> j) {
  for (int v : j) require(v >= 0, Errc::invalid_argument, "expectation: negative multiplicity");
  const FactorLayout layout = layout_of(j);
  if (layout.factor_groups.size() % 2 == 1) return 0.0;
  const auto terms = pairing_terms(layout.factor_groups);

  if (spec.is_discrete()) {
    const Rule1D& rule = spec.rule();
    return tensor_sum(terms, layout.dims, rule.points, rule.weights,
                      covariance_table(spec.kernel(), rule.points));
  }
  if (spec.kernel().is_exact()) {
    require(layout.dims <= kMaxExactTimeDimension, Errc::unsupported,
            "expectation: exact Brownian time dimension " + std::to_string(layout.dims) +
                " exceeds the deterministic bound; use mc_moment_oracle");
    return exact_continuous(terms, layout.dims);
  }
  const Rule1D rule = continuous_rule_for(layout.dims);
  return tensor_sum(terms, layout.dims, rule.points, rule.weights,
                    covariance_table(spec.kernel(), rule.points));
}

// ---------------------------------------------------------------------------
// Order verification
// ---------------------------------------------------------------------------

std::vector<MomentIndex> OrderReport::violated() const {
  std::vector<MomentIndex> out;
  for (const auto& e : entries)
    if (!e.pass) out.push_back(e.index);
  return out;
}

double default_order_tolerance(const MomentSpec& spec) { return spec.is_discrete() ? 1e-10 : 1e-9; }

OrderReport verify_order(const MomentSpec& spec, int nu, double tol) {
  require(nu >= 1, Errc::invalid_argument, "verify_order: nu must be >= 1");
  require(tol > 0.0, Errc::invalid_argument, "verify_order: tolerance must be positive");
  const MomentSpec exact = MomentSpec::exact_brownian();
  OrderReport report;
  report.nu = nu;
  report.tol = tol;
  for (const auto& idx : enumerate_indices_up_to(nu)) {
    OrderEntry e;
    e.index = idx;
    e.lhs = moment(exact, idx);
    e.rhs = moment(spec, idx);
    e.residual = std::abs(e.lhs - e.rhs);
    e.pass = e.residual < tol;
    report.max_residual = std::max(report.max_residual, e.residual);
    report.entries.push_back(std::move(e));
  }
  report.pass = report.max_residual < tol;
  return report;
}

nlohmann::json to_json(const MomentIndex& idx) {
  return {{"mu", idx.mu}, {"j", idx.j}, {"label", idx.label()}};
}

nlohmann::json to_json(const OrderReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"index", to_json(e.index)},
                       {"lhs", e.lhs},
                       {"rhs", e.rhs},
                       {"residual", e.residual},
                       {"pass", e.pass}});
  nlohmann::json violated = nlohmann::json::array();
  for (const auto& idx : report.violated()) violated.push_back(idx.label());
  return {{"nu", report.nu},
          {"tol", report.tol},
          {"max_residual", report.max_residual},
          {"pass", report.pass},
          {"violated", violated},
          {"entries", entries}};
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

namespace {

struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  McEstimate estimate() const {
    const double var = n > 1 ? m2 / (n - 1) : 0.0;
    return {mean, std::sqrt(var / std::max<long>(n, 1))};
  }
};

}  // namespace

QuarticCheck isserlis_quartic_check(std::span<const double> M, int dim, long samples,
                                    std::uint64_t seed) {
  require(dim >= 1 && dim <= 6, Errc::invalid_argument, "isserlis_quartic_check: dim in [1,6]");
  const std::size_t n = static_cast<std::size_t>(dim);
  require(M.size() == n * n * n * n, Errc::invalid_argument,
          "isserlis_quartic_check: M must hold dim^4 entries");
  auto at = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return M[((i * n + j) * n + k) * n + l];
  };
  QuarticCheck out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.pairing += at(i, i, j, j) + at(i, j, i, j) + at(i, j, j, i);

  std::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal;
  std::vector<double> a(n);
  Welford acc;
  for (long s = 0; s < samples; ++s) {
    for (auto& v : a) v = normal(rng);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l) sum += a[i] * a[j] * a[k] * a[l] * at(i, j, k, l);
    acc.add(sum);
  }
  const auto est = acc.estimate();
  out.monte_carlo = est.mean;
  out.standard_error = est.standard_error;
  return out;
}

namespace {

// Per-sample path statistics: end point and averages M_1..M_kmax.
class PathSampler {
 public:
  PathSampler(const MomentSpec& spec, int kmax, int truncation) : kmax_(kmax) {
    if (spec.kernel().is_exact()) {
      if (spec.is_discrete()) {
        mode_ = Mode::ExactDiscrete;
        times_ = spec.rule().points;
        weights_ = spec.rule().weights;
      } else {
        mode_ = Mode::ExactSeries;
        levels_ = 0;
        while ((1 << levels_) - 1 < truncation) ++levels_;
        cells_ = 1 << levels_;
        values_.assign(cells_ + 1, 0.0);
        panel_ = gauss_legendre_01(std::max(1, (kmax + 2) / 2));
      }
    } else {
      const LambdaSystem& sys = *spec.kernel().system();
      mode_ = Mode::Finite;
      const Rule1D rule =
          spec.is_discrete() ? spec.rule() : composite_01(32, 8, EndpointMap::SineSquared);
      times_ = rule.points;
      weights_ = rule.weights;
      q_ = sys.q();
      lambda_.assign(times_.size() * (q_ + 1), 0.0);
      for (std::size_t i = 0; i < times_.size(); ++i)
        sys.eval_all(times_[i], std::span<double>(lambda_.data() + i * (q_ + 1), q_ + 1));
      coeffs_.assign(q_ + 1, 0.0);
    }
  }

  // out[0] = B_1, out[k] = M_k for k = 1..kmax.
  template <class Rng>
  void sample(Rng& rng, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    switch (mode_) {
      case Mode::ExactSeries: sample_series(rng, out); break;
      case Mode::ExactDiscrete: sample_discrete_exact(rng, out); break;
      case Mode::Finite: sample_finite(rng, out); break;
    }
  }

 private:
  enum class Mode { ExactSeries, ExactDiscrete, Finite };

  template <class Rng>
  void sample_series(Rng& rng, std::vector<double>& out) {
    // Levy-Ciesielski partial sum at the dyadic points: a_0 u plus Schauder
    // levels 1..L, built by midpoint displacement.
    values_[0] = 0.0;
    values_[cells_] = normal_(rng);
    for (int l = 1; l <= levels_; ++l) {
      const int stride = cells_ >> (l - 1);
      const double amp = std::pow(2.0, -0.5 * (l + 1));
      for (int left = 0; left < cells_; left += stride) {
        const int mid = left + stride / 2;
        values_[mid] = 0.5 * (values_[left] + values_[left + stride]) + amp * normal_(rng);
      }
    }
    out[0] = values_[cells_];
    const double h = 1.0 / cells_;
    for (int c = 0; c < cells_; ++c) {
      const double y0 = values_[c];
      const double dy = values_[c + 1] - y0;
      for (std::size_t g = 0; g < panel_.size(); ++g) {
        const double y = y0 + dy * panel_.points[g];
        const double w = h * panel_.weights[g];
        double p = w;
        for (int k = 1; k <= kmax_; ++k) {
          p *= y;
          out[k] += p;
        }
      }
    }
  }

  template <class Rng>
  void sample_discrete_exact(Rng& rng, std::vector<double>& out) {
    double t = 0.0, b = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double dt = times_[i] - t;
      if (dt > 0.0) b += std::sqrt(dt) * normal_(rng);
      t = times_[i];
      double p = weights_[i];
      for (int k = 1; k <= kmax_; ++k) {
        p *= b;
        out[k] += p;
      }
    }
    if (t < 1.0) b += std::sqrt(1.0 - t) * normal_(rng);
    out[0] = b;
  }

  template <class Rng>
  void sample_finite(Rng& rng, std::vector<double>& out) {
    for (auto& c : coeffs_) c = normal_(rng);
    out[0] = coeffs_[0];  // every bridge function vanishes at u = 1
    const int stride = q_ + 1;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double* lam = lambda_.data() + i * stride;
      double b = 0.0;
      for (int k = 0; k <= q_; ++k) b += coeffs_[k] * lam[k];
      double p = weights_[i];
      for (int k = 1; k <= kmax_; ++k) {
        p *= b;
        out[k] += p;
      }
    }
  }

  Mode mode_ = Mode::Finite;
  int kmax_ = 0;
  int levels_ = 0;
  int cells_ = 0;
  int q_ = 0;
  std::vector<double> values_;
  std::vector<double> times_;
  std::vector<double> weights_;
  std::vector<double> lambda_;
  std::vector<double> coeffs_;
  Rule1D panel_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace

std::vector<McEstimate> mc_moment_oracle(const MomentSpec& spec,
                                         std::span<const MomentIndex> indices, long samples,
                                         int truncation, std::uint64_t seed) {
  require(samples >= 2, Errc::invalid_argument, "mc_moment_oracle: need at least 2 samples");
  if (spec.kernel().is_exact() && !spec.is_discrete())
    require(truncation >= 50, Errc::invalid_argument,
            "mc_moment_oracle: truncation must be >= 50 for exact Brownian paths");
  int kmax = 1;
  for (const auto& idx : indices)
    for (std::size_t k = 2; k < idx.j.size(); ++k)
      if (idx.j[k] > 0) kmax = std::max(kmax, static_cast<int>(k) - 1);

  PathSampler sampler(spec, kmax, truncation);
  std::mt19937_64 rng(seed);
  std::vector<double> stats(kmax + 1);
  std::vector<Welford> acc(indices.size());
  for (long s = 0; s < samples; ++s) {
    sampler.sample(rng, stats);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto& j = indices[i].j;
      double v = std::pow(stats[0], j[0]);  // M_0 = 1
      for (std::size_t k = 2; k < j.size(); ++k)
        if (j[k] > 0) v *= std::pow(stats[k - 1], j[k]);
      acc[i].add(v);
    }
  }
  std::vector<McEstimate> out;
  out.reserve(acc.size());
  for (const auto& a : acc) out.push_back(a.estimate());
  return out;
}

McEstimate mc_moment_oracle(const MomentSpec& spec, const MomentIndex& idx, long samples,
                            int truncation, std::uint64_t seed) {
  return mc_moment_oracle(spec, std::span<const MomentIndex>(&idx, 1), samples, truncation, seed)
      .front();
}

}  // namespace shorttime
