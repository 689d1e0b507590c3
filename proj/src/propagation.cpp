#include "shorttime/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "shorttime/errors.hpp"

namespace shorttime {

void SpatialGrid::validate() const {
  require(std::isfinite(a) && std::isfinite(b) && b > a, Errc::invalid_argument,
          "SpatialGrid: need finite a < b");
  require(M >= 2, Errc::invalid_argument, "SpatialGrid: M must be >= 2");
}

SpatialGrid SpatialGrid::default_for(const Potential& potential) {
  switch (potential.kind()) {
    case PotentialKind::Quartic: return {-4.0, 4.0, 400};
    case PotentialKind::HeCage: return {0.0, potential.parameters().at("length").get<double>(), 500};
    default: return {-6.0, 6.0, 400};
  }
}

KernelMatrix build_matrix(const ShortTimeKernel& kernel, const PhysicalParams& params,
                          const SpatialGrid& grid, int n) {
  grid.validate();
  params.validate();
  require(n >= 0, Errc::invalid_argument, "build_matrix: n must be >= 0");
  KernelMatrix km;
  km.n = n;
  km.slice_beta = params.beta / (n + 1);
  const PhysicalParams slice = params.with_beta(km.slice_beta);
  const int size = grid.size();
  const double h = grid.h();
  km.A.setZero(size, size);
  // Entries whose free-particle factor is below exp(-kFreeExponentCutoff)
  // relative to the diagonal are left at zero.
  const double inv_two_sigma2 = 1.0 / (2.0 * slice.sigma() * slice.sigma());
  std::optional<std::string> error;
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < size; ++i) {
    const double xi = grid.x(i);
    for (int j = i; j < size; ++j) {
      double v = 0.0;
      const double d = grid.x(j) - xi;
      if (d * d * inv_two_sigma2 > kFreeExponentCutoff) break;
      try {
        v = h * kernel.rho0(slice, xi, grid.x(j));
      } catch (const Error& e) {
#pragma omp critical
        if (!error) {
          std::ostringstream os;
          os << "build_matrix: entry (" << i << "," << j << "): " << e.what();
          error = os.str();
        }
      }
      km.A(i, j) = v;
    }
  }
  if (error) fail(Errc::numerical, *error);
  km.A.triangularView<Eigen::StrictlyLower>() = km.A.transpose().triangularView<Eigen::StrictlyLower>();
  return km;
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& A, int p) {
  require(p >= 1, Errc::invalid_argument, "matrix_power: exponent must be >= 1");
  require(A.rows() == A.cols(), Errc::invalid_argument, "matrix_power: matrix must be square");
  Eigen::MatrixXd base = A;
  Eigen::MatrixXd result;
  bool have = false;
  while (p > 0) {
    if (p & 1) {
      if (have) {
        result = result * base;
      } else {
        result = base;
        have = true;
      }
    }
    p >>= 1;
    if (p > 0) base = base * base;
  }
  return result;
}

namespace {

double checked_trace(const Eigen::MatrixXd& P) {
  long double tr = 0.0L;
  for (Eigen::Index i = 0; i < P.rows(); ++i) tr += static_cast<long double>(P(i, i));
  const double z = static_cast<double>(tr);
  require(std::isfinite(z), Errc::numerical,
          "partition_function: overflow in the matrix power; shift the potential energy origin "
          "to rescale");
  return z;
}

}  // namespace

double partition_function(const Eigen::MatrixXd& A, int n) {
  require(n >= 0, Errc::invalid_argument, "partition_function: n must be >= 0");
  return checked_trace(matrix_power(A, n + 1));
}

double partition_function(const KernelMatrix& matrix) { return partition_function(matrix.A, matrix.n); }

double nmm_Z(const ShortTimeKernel& kernel, const PhysicalParams& params, const SpatialGrid& grid,
             int n) {
  return partition_function(build_matrix(kernel, params, grid, n));
}

Eigen::MatrixXd nmm_density(const ShortTimeKernel& kernel, const PhysicalParams& params,
                            const SpatialGrid& grid, int n) {
  const KernelMatrix km = build_matrix(kernel, params, grid, n);
  return matrix_power(km.A, n + 1) / grid.h();
}

Eigen::VectorXd dvr_energies(const Potential& potential, const PhysicalParams& params,
                             const SpatialGrid& grid, double potential_cap) {
  grid.validate();
  params.validate();
  std::vector<int> keep;
  for (int i = 0; i < grid.size(); ++i) {
    const double v = potential.value(grid.x(i));
    require(!std::isnan(v), Errc::numerical, "dvr_energies: potential returned NaN");
    if (v <= potential_cap) keep.push_back(i);
  }
  require(keep.size() >= 2, Errc::invalid_argument, "dvr_energies: fewer than two usable points");
  const int n = static_cast<int>(keep.size());
  const double h = grid.h();
  const double t0 = params.hbar * params.hbar / (2.0 * params.mass * h * h);
  Eigen::MatrixXd H(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const int d = keep[r] - keep[c];
      if (d == 0) {
        H(r, c) = t0 * std::numbers::pi * std::numbers::pi / 3.0 + potential.value(grid.x(keep[r]));
      } else {
        H(r, c) = t0 * ((d % 2 == 0) ? 2.0 : -2.0) / (static_cast<double>(d) * d);
      }
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, Errc::numerical, "dvr_energies: eigensolver failed");
  return es.eigenvalues();
}

double dvr_Z(const Potential& potential, const PhysicalParams& params, const SpatialGrid& grid,
             double potential_cap) {
  const Eigen::VectorXd e = dvr_energies(potential, params, grid, potential_cap);
  long double z = 0.0L;
  for (Eigen::Index i = 0; i < e.size(); ++i) z += std::exp(-static_cast<long double>(params.beta) * e(i));
  return static_cast<double>(z);
}

ReferenceZ reference_Z(const ShortTimeKernel& kernel_order4, const PhysicalParams& params,
                       const SpatialGrid& grid, int n_ref, bool check_eigensolve) {
  require(n_ref >= 3 && n_ref % 2 == 1, Errc::invalid_argument,
          "reference_Z: n_ref must be odd and >= 3");
  ReferenceZ ref;
  ref.n_ref = n_ref;
  const KernelMatrix full = build_matrix(kernel_order4, params, grid, n_ref);
  const Eigen::MatrixXd P = matrix_power(full.A, n_ref + 1);
  ref.z_n = checked_trace(P);
  ref.density.resize(grid.size());
  for (int i = 0; i < grid.size(); ++i) ref.density[i] = P(i, i) / grid.h();
  const int n_half = (n_ref + 1) / 2 - 1;
  ref.z_half = nmm_Z(kernel_order4, params, grid, n_half);
  ref.z = ref.z_n + (ref.z_n - ref.z_half) / 15.0;
  ref.z_eigen = std::numeric_limits<double>::quiet_NaN();
  if (check_eigensolve) {
    ref.z_eigen = dvr_Z(kernel_order4.potential(), params, grid);
    ref.rel_diff = std::abs(ref.z - ref.z_eigen) / std::abs(ref.z_eigen);
    if (ref.rel_diff > 1e-5) {
      std::ostringstream os;
      os << "reference_Z: NMM reference " << ref.z << " and grid eigensolve " << ref.z_eigen
         << " disagree by " << ref.rel_diff << " (grid under-resolved?)";
      fail(Errc::numerical, os.str());
    }
  }
  return ref;
}

std::pair<double, double> least_squares_line(const std::vector<double>& x,
                                             const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, Errc::invalid_argument,
          "least_squares_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  require(sxx > 0.0, Errc::invalid_argument, "least_squares_line: degenerate abscissas");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

OrderDiagnostics order_diagnostic(const ShortTimeKernel& kernel, const PhysicalParams& params,
                                  const SpatialGrid& grid, const std::vector<int>& m_list,
                                  double z_ref) {
  require(!m_list.empty(), Errc::invalid_argument, "order_diagnostic: empty m list");
  require(z_ref > 0.0, Errc::invalid_argument, "order_diagnostic: reference Z must be positive");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    require(m_list[i] >= 1, Errc::invalid_argument, "order_diagnostic: m must be >= 1");
    if (i > 0)
      require(m_list[i] > m_list[i - 1], Errc::invalid_argument,
              "order_diagnostic: m list must be increasing");
  }
  OrderDiagnostics d;
  d.kernel = std::string(to_string(kernel.kind()));
  d.z_ref = z_ref;
  std::vector<int> ns;
  for (int m : m_list) {
    ns.push_back(2 * m - 1);
    ns.push_back(2 * m + 1);
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (int n : ns) {
    const double z = nmm_Z(kernel, params, grid, n);
    d.ladder.push_back({n, z, z / z_ref});
  }
  for (std::size_t i = 1; i < d.ladder.size(); ++i)
    if (d.ladder[i].z > d.ladder[i - 1].z) d.monotone = false;
  if (!d.monotone) d.warnings.push_back("Z_n is not monotonically decreasing along the ladder");

  auto r_at = [&](int n) {
    for (const auto& p : d.ladder)
      if (p.n == n) return p.r;
    fail(Errc::invalid_argument, "order_diagnostic: missing ladder point");
  };
  for (int m : m_list) {
    const double r_lo = r_at(2 * m - 1);
    const double r_hi = r_at(2 * m + 1);
    if (std::abs(r_hi - 1.0) < 1e-13) {
      d.warnings.push_back("series truncated at m = " + std::to_string(m) +
                           ": R - 1 below the reference precision");
      break;
    }
    const double a = m * static_cast<double>(m) * std::log1p((r_lo - r_hi) / (r_hi - 1.0));
    if (!std::isfinite(a)) {
      d.warnings.push_back("series truncated at m = " + std::to_string(m) +
                           ": non-finite alpha_m");
      break;
    }
    d.m.push_back(m);
    d.alpha.push_back(a);
  }
  if (d.m.size() >= 2) {
    const std::size_t first = d.m.size() / 2;
    std::vector<double> xs, ys;
    for (std::size_t i = first; i < d.m.size(); ++i) {
      xs.push_back(d.m[i]);
      ys.push_back(d.alpha[i]);
    }
    if (xs.size() < 2) {
      xs.insert(xs.begin(), d.m[first - 1]);
      ys.insert(ys.begin(), d.alpha[first - 1]);
    }
    std::tie(d.slope, d.intercept) = least_squares_line(xs, ys);
    d.fit_first_m = static_cast<int>(xs.front());
    d.fit_last_m = static_cast<int>(xs.back());
  } else {
    d.slope = std::numeric_limits<double>::quiet_NaN();
    d.warnings.push_back("fewer than two alpha_m values; no slope fitted");
  }
  return d;
}

double trotter_constant_theory(const Potential& potential, const PhysicalParams& params,
                               const SpatialGrid& grid, const std::vector<double>& density) {
  require(static_cast<int>(density.size()) == grid.size(), Errc::invalid_argument,
          "trotter_constant_theory: density must have one value per grid point");
  long double num = 0.0L, den = 0.0L;
  for (int i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    if (!potential.in_domain(x) || density[i] == 0.0) continue;
    const double f = potential.deriv1(x);
    num += static_cast<long double>(f) * f * density[i];
    den += density[i];
  }
  require(den > 0.0L, Errc::numerical, "trotter_constant_theory: density vanishes on the grid");
  const double b = params.beta;
  return params.hbar * params.hbar * b * b * b / (24.0 * params.mass) *
         static_cast<double>(num / den);
}

TrotterConstantSeries trotter_constant(const Potential& potential, const PhysicalParams& params,
                                       const SpatialGrid& grid, const std::vector<int>& n_list,
                                       const ReferenceZ& reference) {
  require(!n_list.empty(), Errc::invalid_argument, "trotter_constant: empty n list");
  TrotterConstantSeries s;
  s.z_ref = reference.z;
  s.c_th = trotter_constant_theory(potential, params, grid, reference.density);
  const ShortTimeKernel tt = ShortTimeKernel::trotter(potential);
  for (int n : n_list) {
    const double z = nmm_Z(tt, params, grid, n);
    s.n.push_back(n);
    s.z.push_back(z);
    s.c.push_back((n + 1.0) * (n + 1.0) * (z - s.z_ref) / s.z_ref);
  }
  s.rel_dev_last = s.c_th != 0.0 ? std::abs(s.c.back() - s.c_th) / std::abs(s.c_th)
                                 : std::abs(s.c.back());
  return s;
}

McEstimate mc_density_ratio(const ShortTimeKernel& kernel, const PhysicalParams& params, double x,
                            double xp, int levels, long samples, std::uint64_t seed) {
  require(kernel.system() != nullptr, Errc::invalid_argument,
          "mc_density_ratio: kernel must be a reweighted family");
  require(levels >= 0 && levels <= 16, Errc::invalid_argument,
          "mc_density_ratio: levels must lie in [0,16]");
  require(samples >= 2, Errc::invalid_argument, "mc_density_ratio: need at least 2 samples");
  const LambdaSystem& sys = *kernel.system();
  const Rule1D& rule = kernel.time_rule();
  const int q = sys.q();
  const int cells = 1 << levels;
  const int nt = static_cast<int>(rule.size());
  const int npts = cells * nt;
  const double sigma = params.sigma();
  const double dil = 1.0 / std::sqrt(static_cast<double>(cells));

  // Points u' = (u_i + j - 1) / 2^k with weights w_i / 2^k; for each point the
  // active Schauder tent per level and the bridge values of its own cell.
  std::vector<double> ref(npts), wt(npts);
  std::vector<int> tent_index(static_cast<std::size_t>(npts) * levels);
  std::vector<double> tent_value(static_cast<std::size_t>(npts) * levels);
  std::vector<double> bridge(static_cast<std::size_t>(npts) * q);
  std::vector<double> lam(q + 1);
  int offset = 0;
  for (int l = 1; l <= levels; ++l) offset += 1 << (l - 1);
  const int n_schauder = offset;
  for (int j = 0; j < cells; ++j)
    for (int i = 0; i < nt; ++i) {
      const int p = j * nt + i;
      const double u = (rule.points[i] + j) / cells;
      ref[p] = x + (xp - x) * u;
      wt[p] = rule.weights[i] / cells;
      int base = 0;
      for (int l = 1; l <= levels; ++l) {
        const int jl = cell_of(u, 1 << (l - 1));
        tent_index[static_cast<std::size_t>(p) * levels + (l - 1)] = base + jl - 1;
        tent_value[static_cast<std::size_t>(p) * levels + (l - 1)] = schauder(l, jl, u);
        base += 1 << (l - 1);
      }
      sys.eval_all(rule.points[i], lam);
      for (int k = 1; k <= q; ++k) bridge[static_cast<std::size_t>(p) * q + (k - 1)] = dil * lam[k];
    }

  const Potential& pot = kernel.potential();
  std::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal;
  std::vector<double> a(n_schauder), b(static_cast<std::size_t>(cells) * q);
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  for (long s = 0; s < samples; ++s) {
    for (auto& v : a) v = normal(rng);
    for (auto& v : b) v = normal(rng);
    double avg = 0.0;
    for (int p = 0; p < npts; ++p) {
      double path = 0.0;
      for (int l = 0; l < levels; ++l)
        path += a[tent_index[static_cast<std::size_t>(p) * levels + l]] *
                tent_value[static_cast<std::size_t>(p) * levels + l];
      const int j = p / nt;
      for (int k = 0; k < q; ++k)
        path += b[static_cast<std::size_t>(j) * q + k] * bridge[static_cast<std::size_t>(p) * q + k];
      avg += wt[p] * pot.value(ref[p] + sigma * path);
    }
    require(!std::isnan(avg), Errc::numerical, "mc_density_ratio: potential returned NaN");
    const double val = std::isinf(avg) ? 0.0 : std::exp(-params.beta * avg);
    ++n;
    const double delta = val - mean;
    mean += delta / n;
    m2 += delta * (val - mean);
  }
  return {mean, std::sqrt(m2 / (n - 1) / n)};
}

double nmm_density_ratio(const ShortTimeKernel& kernel, const PhysicalParams& params,
                         const SpatialGrid& grid, double x, double xp, int n) {
  grid.validate();
  auto index_of = [&](double v) {
    const double t = (v - grid.a) / grid.h();
    const long i = std::lround(t);
    require(i >= 0 && i <= grid.M && std::abs(t - i) < 1e-9, Errc::invalid_argument,
            "nmm_density_ratio: x and x' must be grid points");
    return static_cast<int>(i);
  };
  const int i = index_of(x);
  const int j = index_of(xp);
  const Eigen::MatrixXd rho = nmm_density(kernel, params, grid, n);
  return rho(i, j) / rho_fp(params, x, xp);
}

nlohmann::json to_json(const OrderDiagnostics& d) {
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& p : d.ladder) ladder.push_back({{"n", p.n}, {"Z", p.z}, {"R", p.r}});
  return {{"kernel", d.kernel},
          {"Z_ref", d.z_ref},
          {"ladder", ladder},
          {"m", d.m},
          {"alpha", d.alpha},
          {"slope", d.slope},
          {"intercept", d.intercept},
          {"fit_window", {d.fit_first_m, d.fit_last_m}},
          {"monotone", d.monotone},
          {"warnings", d.warnings}};
}

nlohmann::json to_json(const TrotterConstantSeries& s) {
  return {{"Z_ref", s.z_ref}, {"c_th", s.c_th}, {"n", s.n},
          {"Z", s.z},         {"c", s.c},       {"rel_dev_last", s.rel_dev_last}};
}

}  // namespace shorttime
