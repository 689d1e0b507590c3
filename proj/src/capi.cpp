#include "shorttime/shorttime.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "shorttime/calibration.hpp"
#include "shorttime/errors.hpp"
#include "shorttime/kernels.hpp"
#include "shorttime/moments.hpp"
#include "shorttime/potentials.hpp"
#include "shorttime/processes.hpp"
#include "shorttime/propagation.hpp"
#include "shorttime/quadrature.hpp"

using namespace shorttime;

struct st_rule {
  Rule1D rule;
};
struct st_system {
  LambdaSystem sys;
};
struct st_spec {
  MomentSpec spec;
};
struct st_report {
  OrderReport report;
};
struct st_potential {
  Potential pot;
};
struct st_kernel {
  ShortTimeKernel kernel;
};
struct st_series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  double headline = 0.0;
  nlohmann::json summary;
};

namespace {

thread_local std::string g_last_error;

st_status to_status(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return ST_INVALID_ARGUMENT;
    case Errc::domain: return ST_DOMAIN;
    case Errc::not_converged: return ST_NOT_CONVERGED;
    case Errc::numerical: return ST_NUMERICAL;
    case Errc::unsupported: return ST_UNSUPPORTED;
  }
  return ST_INTERNAL;
}

st_status set_error(st_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

template <class F>
st_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return ST_OK;
  } catch (const Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(ST_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(ST_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(ST_INTERNAL, e.what());
  } catch (...) {
    return set_error(ST_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, Errc::invalid_argument, std::string(what) + " must not be NULL");
}

st_status write_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap < s.size() + 1)
    return set_error(ST_BUFFER_TOO_SMALL, "buffer too small for " + std::to_string(s.size() + 1) +
                                               " bytes");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return ST_OK;
}

PhysicalParams to_params(const st_params* p) {
  need(p, "params");
  PhysicalParams out{p->hbar, p->mass, p->beta};
  out.validate();
  return out;
}

SpatialGrid to_grid(const st_grid* g) {
  need(g, "grid");
  SpatialGrid out{g->a, g->b, g->M};
  out.validate();
  return out;
}

CalibrationFamily to_family(st_family f) {
  switch (f) {
    case ST_ORDER3_CONTINUOUS: return CalibrationFamily::Order3Continuous;
    case ST_ORDER3_DISCRETE: return CalibrationFamily::Order3Discrete;
    case ST_ORDER4_CONTINUOUS: return CalibrationFamily::Order4Continuous;
    case ST_ORDER4_DISCRETE: return CalibrationFamily::Order4Discrete;
  }
  fail(Errc::invalid_argument, "unknown family value");
}

PhysicalParams default_params_for(const Potential& pot) {
  if (pot.kind() == PotentialKind::HeCage)
    return kelvin_angstrom_params(pot.parameters().at("mass_amu").get<double>(), 1.0 / 5.11);
  return {1.0, 1.0, 10.0};
}

ShortTimeKernel kernel_by_name(const std::string& name, const Potential& pot, int gh) {
  if (gh <= 0) gh = kDefaultGaussHermitePoints;
  if (name == "free") return ShortTimeKernel::free_particle(pot);
  if (name == "trotter") return ShortTimeKernel::trotter(pot);
  const CalibrationFamily fam = parse_calibration_family(name);
  const CalibrationResult& cal = calibrated(fam);
  if (is_discrete(fam)) return ShortTimeKernel::discrete(cal.system(), cal.rule, pot, gh);
  return ShortTimeKernel::continuous(cal.system(), pot, gh);
}

}  // namespace

extern "C" {

const char* st_last_error(void) { return g_last_error.c_str(); }

const char* st_status_string(st_status status) {
  switch (status) {
    case ST_OK: return "ok";
    case ST_INVALID_ARGUMENT: return "invalid argument";
    case ST_DOMAIN: return "domain error";
    case ST_NOT_CONVERGED: return "not converged";
    case ST_NUMERICAL: return "numerical error";
    case ST_UNSUPPORTED: return "unsupported";
    case ST_BUFFER_TOO_SMALL: return "buffer too small";
    case ST_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* st_version(void) { return "1.0.0"; }

// --- rules -----------------------------------------------------------------

st_status st_rule_gauss_legendre(int p, st_rule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_rule{gauss_legendre_01(p)};
  });
}

st_status st_rule_gauss_hermite(int p, st_rule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_rule{gauss_hermite(p)};
  });
}

st_status st_rule_composite(int cells, int panel_points, int sine_squared, st_rule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_rule{composite_01(cells, panel_points,
                                    sine_squared ? EndpointMap::SineSquared : EndpointMap::None)};
  });
}

st_status st_rule_custom(const double* points, const double* weights, size_t n, st_rule** out) {
  return guarded([&] {
    need(out, "out");
    need(points, "points");
    need(weights, "weights");
    *out = new st_rule{custom_rule(std::vector<double>(points, points + n),
                                   std::vector<double>(weights, weights + n))};
  });
}

st_status st_rule_trapezoid(st_rule** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_rule{trapezoid_endpoints()};
  });
}

st_status st_rule_size(const st_rule* rule, size_t* out) {
  return guarded([&] {
    need(rule, "rule");
    need(out, "out");
    *out = rule->rule.size();
  });
}

st_status st_rule_get(const st_rule* rule, double* points, double* weights, size_t cap) {
  st_status s = guarded([&] {
    need(rule, "rule");
    need(points, "points");
    need(weights, "weights");
  });
  if (s != ST_OK) return s;
  if (cap < rule->rule.size()) return set_error(ST_BUFFER_TOO_SMALL, "rule buffer too small");
  std::copy(rule->rule.points.begin(), rule->rule.points.end(), points);
  std::copy(rule->rule.weights.begin(), rule->rule.weights.end(), weights);
  return ST_OK;
}

void st_rule_free(st_rule* rule) { delete rule; }

// --- systems ---------------------------------------------------------------

st_status st_system_order3(double alpha, st_system** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_system{LambdaSystem::order3(alpha)};
  });
}

st_status st_system_order4(double alpha1, double alpha2, st_system** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_system{LambdaSystem::order4(alpha1, alpha2)};
  });
}

st_status st_system_calibrated(const char* family, st_system** out) {
  return guarded([&] {
    need(family, "family");
    need(out, "out");
    *out = new st_system{calibrated(parse_calibration_family(family)).system()};
  });
}

st_status st_system_q(const st_system* sys, int* out) {
  return guarded([&] {
    need(sys, "system");
    need(out, "out");
    *out = sys->sys.q();
  });
}

st_status st_system_eval(const st_system* sys, int k, double u, double* out) {
  return guarded([&] {
    need(sys, "system");
    need(out, "out");
    *out = sys->sys.eval(k, u);
  });
}

st_status st_system_covariance(const st_system* sys, double u, double v, double* out) {
  return guarded([&] {
    need(sys, "system");
    need(out, "out");
    *out = CovarianceKernel::finite(sys->sys)(u, v);
  });
}

void st_system_free(st_system* sys) { delete sys; }

// --- calibration -----------------------------------------------------------

st_status st_family_parse(const char* name, st_family* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<st_family>(static_cast<int>(parse_calibration_family(name)));
  });
}

st_status st_calibrate(st_family family, const double* guess, size_t guess_len, int max_iter,
                       double* constants, size_t* n_constants, double* residual_norm,
                       int* iterations) {
  return guarded([&] {
    need(constants, "constants");
    CalibrationRequest req;
    req.family = to_family(family);
    if (guess) req.guess.assign(guess, guess + guess_len);
    if (max_iter > 0) req.max_iter = max_iter;
    const CalibrationResult r = calibrate(req);
    for (std::size_t i = 0; i < r.constants.size(); ++i) constants[i] = r.constants[i];
    if (n_constants) *n_constants = r.constants.size();
    if (residual_norm) *residual_norm = r.residual_norm;
    if (iterations) *iterations = r.iterations;
  });
}

st_status st_calibrate_json(st_family family, char* buf, size_t cap, size_t* needed) {
  std::string text;
  st_status s = guarded([&] { text = to_json(calibrated(to_family(family))).dump(); });
  if (s != ST_OK) return s;
  return write_string(text, buf, cap, needed);
}

st_status st_residual_order3(double alpha, const st_rule* rule, double* out) {
  return guarded([&] {
    need(rule, "rule");
    need(out, "out");
    *out = residual_order3(alpha, rule->rule);
  });
}

st_status st_residual_order4(double alpha1, double alpha2, const st_rule* rule, double out[2]) {
  return guarded([&] {
    need(rule, "rule");
    need(out, "out");
    const auto r = residual_order4(alpha1, alpha2, rule->rule);
    out[0] = r[0];
    out[1] = r[1];
  });
}

// --- moments ---------------------------------------------------------------

st_status st_spec_exact(st_spec** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_spec{MomentSpec::exact_brownian()};
  });
}

st_status st_spec_trotter(st_spec** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_spec{MomentSpec::trotter()};
  });
}

st_status st_spec_continuous(const st_system* sys, st_spec** out) {
  return guarded([&] {
    need(sys, "system");
    need(out, "out");
    *out = new st_spec{MomentSpec::continuous(CovarianceKernel::finite(sys->sys))};
  });
}

st_status st_spec_discrete(const st_system* sys, const st_rule* rule, st_spec** out) {
  return guarded([&] {
    need(rule, "rule");
    need(out, "out");
    CovarianceKernel k = sys ? CovarianceKernel::finite(sys->sys) : CovarianceKernel::exact_brownian();
    *out = new st_spec{MomentSpec::discrete(std::move(k), rule->rule)};
  });
}

st_status st_spec_by_name(const char* name, st_spec** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    const std::string n(name);
    if (n == "exact") {
      *out = new st_spec{MomentSpec::exact_brownian()};
      return;
    }
    if (n == "trotter") {
      *out = new st_spec{MomentSpec::trotter()};
      return;
    }
    const CalibrationFamily fam = parse_calibration_family(n);
    const CalibrationResult& cal = calibrated(fam);
    CovarianceKernel k = CovarianceKernel::finite(cal.system());
    *out = new st_spec{is_discrete(fam) ? MomentSpec::discrete(std::move(k), cal.rule)
                                        : MomentSpec::continuous(std::move(k))};
  });
}

void st_spec_free(st_spec* spec) { delete spec; }

st_status st_index_count(int mu, size_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = enumerate_indices(mu).size();
  });
}

st_status st_moment(const st_spec* spec, const int* j, size_t len, double* out) {
  return guarded([&] {
    need(spec, "spec");
    need(j, "j");
    need(out, "out");
    *out = expectation(spec->spec, std::span<const int>(j, len));
  });
}

st_status st_mc_moment(const st_spec* spec, const int* j, size_t len, long samples,
                       int truncation, uint64_t seed, double* mean, double* std_error) {
  return guarded([&] {
    need(spec, "spec");
    need(j, "j");
    need(mean, "mean");
    const MomentIndex idx = MomentIndex::from_multiplicities(std::vector<int>(j, j + len));
    const McEstimate e = mc_moment_oracle(spec->spec, idx, samples, truncation, seed);
    *mean = e.mean;
    if (std_error) *std_error = e.standard_error;
  });
}

st_status st_isserlis_quartic_check(const double* M, int dim, long samples, uint64_t seed,
                                    double* monte_carlo, double* std_error, double* pairing) {
  return guarded([&] {
    need(M, "M");
    require(dim >= 1, Errc::invalid_argument, "dim must be >= 1");
    const std::size_t n = static_cast<std::size_t>(dim);
    const QuarticCheck c =
        isserlis_quartic_check(std::span<const double>(M, n * n * n * n), dim, samples, seed);
    if (monte_carlo) *monte_carlo = c.monte_carlo;
    if (std_error) *std_error = c.standard_error;
    if (pairing) *pairing = c.pairing;
  });
}

st_status st_verify_order(const st_spec* spec, int nu, double tol, st_report** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new st_report{tol > 0.0 ? verify_order(spec->spec, nu, tol) : verify_order(spec->spec, nu)};
  });
}

st_status st_report_pass(const st_report* report, int* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.pass ? 1 : 0;
  });
}

st_status st_report_max_residual(const st_report* report, double* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.max_residual;
  });
}

st_status st_report_size(const st_report* report, size_t* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.entries.size();
  });
}

st_status st_report_violated_count(const st_report* report, size_t* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.violated().size();
  });
}

st_status st_report_json(const st_report* report, char* buf, size_t cap, size_t* needed) {
  std::string text;
  st_status s = guarded([&] {
    need(report, "report");
    text = to_json(report->report).dump();
  });
  if (s != ST_OK) return s;
  return write_string(text, buf, cap, needed);
}

void st_report_free(st_report* report) { delete report; }

// --- potentials, parameters, kernels --------------------------------------

st_status st_potential_by_name(const char* name, st_potential** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    const std::string n(name);
    if (n == "quartic") {
      *out = new st_potential{Potential::quartic()};
    } else if (n == "harmonic") {
      *out = new st_potential{Potential::harmonic(1.0, 1.0)};
    } else if (n == "he-cage") {
      *out = new st_potential{Potential::he_cage()};
    } else if (n == "free") {
      *out = new st_potential{Potential::free_particle()};
    } else {
      fail(Errc::invalid_argument, "unknown potential '" + n + "'");
    }
  });
}

st_status st_potential_harmonic(double omega, double mass, st_potential** out) {
  return guarded([&] {
    need(out, "out");
    *out = new st_potential{Potential::harmonic(omega, mass)};
  });
}

st_status st_potential_value(const st_potential* pot, double x, double* out) {
  return guarded([&] {
    need(pot, "potential");
    need(out, "out");
    *out = pot->pot.value(x);
  });
}

st_status st_potential_deriv1(const st_potential* pot, double x, double* out) {
  return guarded([&] {
    need(pot, "potential");
    need(out, "out");
    *out = pot->pot.deriv1(x);
  });
}

void st_potential_free(st_potential* pot) { delete pot; }

double st_units_constant(void) { return units_constant(); }

st_status st_params_kelvin_angstrom(double mass_amu, double beta_per_kelvin, st_params* out) {
  return guarded([&] {
    need(out, "out");
    const PhysicalParams p = kelvin_angstrom_params(mass_amu, beta_per_kelvin);
    p.validate();
    *out = {p.hbar, p.mass, p.beta};
  });
}

st_status st_default_params(const st_potential* pot, st_params* out) {
  return guarded([&] {
    need(pot, "potential");
    need(out, "out");
    const PhysicalParams p = default_params_for(pot->pot);
    *out = {p.hbar, p.mass, p.beta};
  });
}

st_status st_default_grid(const st_potential* pot, st_grid* out) {
  return guarded([&] {
    need(pot, "potential");
    need(out, "out");
    const SpatialGrid g = SpatialGrid::default_for(pot->pot);
    *out = {g.a, g.b, g.M};
  });
}

st_status st_kernel_by_name(const char* name, const st_potential* pot, int gh_points,
                            st_kernel** out) {
  return guarded([&] {
    need(name, "name");
    need(pot, "potential");
    need(out, "out");
    *out = new st_kernel{kernel_by_name(name, pot->pot, gh_points)};
  });
}

st_status st_kernel_discrete(const st_system* sys, const st_rule* rule, const st_potential* pot,
                             int gh_points, st_kernel** out) {
  return guarded([&] {
    need(sys, "system");
    need(rule, "rule");
    need(pot, "potential");
    need(out, "out");
    *out = new st_kernel{ShortTimeKernel::discrete(
        sys->sys, rule->rule, pot->pot, gh_points > 0 ? gh_points : kDefaultGaussHermitePoints)};
  });
}

st_status st_kernel_continuous(const st_system* sys, const st_potential* pot, int gh_points,
                               st_kernel** out) {
  return guarded([&] {
    need(sys, "system");
    need(pot, "potential");
    need(out, "out");
    *out = new st_kernel{ShortTimeKernel::continuous(
        sys->sys, pot->pot, gh_points > 0 ? gh_points : kDefaultGaussHermitePoints)};
  });
}

st_status st_kernel_rho0(const st_kernel* kernel, const st_params* params, double x, double xp,
                         double* out) {
  return guarded([&] {
    need(kernel, "kernel");
    need(out, "out");
    *out = kernel->kernel.rho0(to_params(params), x, xp);
  });
}

st_status st_rho_fp(const st_params* params, double x, double xp, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = rho_fp(to_params(params), x, xp);
  });
}

void st_kernel_free(st_kernel* kernel) { delete kernel; }

// --- propagation -----------------------------------------------------------

st_status st_nmm_Z(const st_kernel* kernel, const st_params* params, const st_grid* grid, int n,
                   double* out) {
  return guarded([&] {
    need(kernel, "kernel");
    need(out, "out");
    *out = nmm_Z(kernel->kernel, to_params(params), to_grid(grid), n);
  });
}

st_status st_reference_Z(const st_kernel* kernel_order4, const st_params* params,
                         const st_grid* grid, int n_ref, int check_eigensolve, double* z,
                         double* z_eigen) {
  return guarded([&] {
    need(kernel_order4, "kernel");
    need(z, "z");
    const ReferenceZ r = reference_Z(kernel_order4->kernel, to_params(params), to_grid(grid),
                                     n_ref > 0 ? n_ref : kDefaultReferenceN, check_eigensolve != 0);
    *z = r.z;
    if (z_eigen) *z_eigen = r.z_eigen;
  });
}

st_status st_dvr_Z(const st_potential* pot, const st_params* params, const st_grid* grid,
                   double* out) {
  return guarded([&] {
    need(pot, "potential");
    need(out, "out");
    *out = dvr_Z(pot->pot, to_params(params), to_grid(grid));
  });
}

st_status st_nmm_density_ratio(const st_kernel* kernel, const st_params* params,
                               const st_grid* grid, double x, double xp, int n, double* out) {
  return guarded([&] {
    need(kernel, "kernel");
    need(out, "out");
    *out = nmm_density_ratio(kernel->kernel, to_params(params), to_grid(grid), x, xp, n);
  });
}

st_status st_mc_density_ratio(const st_kernel* kernel, const st_params* params, double x,
                              double xp, int levels, long samples, uint64_t seed, double* mean,
                              double* std_error) {
  return guarded([&] {
    need(kernel, "kernel");
    need(mean, "mean");
    const McEstimate e =
        mc_density_ratio(kernel->kernel, to_params(params), x, xp, levels, samples, seed);
    *mean = e.mean;
    if (std_error) *std_error = e.standard_error;
  });
}

st_status st_order_diagnostic(const st_kernel* kernel, const st_params* params,
                              const st_grid* grid, const int* m, size_t count, double z_ref,
                              st_series** out) {
  return guarded([&] {
    need(kernel, "kernel");
    need(m, "m");
    need(out, "out");
    const OrderDiagnostics d = order_diagnostic(kernel->kernel, to_params(params), to_grid(grid),
                                                std::vector<int>(m, m + count), z_ref);
    auto s = std::make_unique<st_series>();
    s->columns = {"m (index)", "n (slices)", "Z_n (dimensionless)", "R (Z_n/Z)",
                  "alpha_m (dimensionless)"};
    for (std::size_t i = 0; i < d.m.size(); ++i) {
      const int n = 2 * d.m[i] + 1;
      double z = std::numeric_limits<double>::quiet_NaN(), r = z;
      for (const auto& p : d.ladder)
        if (p.n == n) {
          z = p.z;
          r = p.r;
        }
      s->rows.push_back({static_cast<double>(d.m[i]), static_cast<double>(n), z, r, d.alpha[i]});
    }
    s->headline = d.slope;
    s->summary = to_json(d);
    *out = s.release();
  });
}

st_status st_trotter_constant(const st_potential* pot, const st_params* params,
                              const st_grid* grid, const int* n, size_t count, int n_ref,
                              st_series** out) {
  return guarded([&] {
    need(pot, "potential");
    need(n, "n");
    need(out, "out");
    const PhysicalParams p = to_params(params);
    const SpatialGrid g = to_grid(grid);
    const ShortTimeKernel k4 = kernel_by_name("order4-discrete", pot->pot, 0);
    const ReferenceZ ref = reference_Z(k4, p, g, n_ref > 0 ? n_ref : kDefaultReferenceN,
                                       pot->pot.kind() != PotentialKind::Free);
    const TrotterConstantSeries tc =
        trotter_constant(pot->pot, p, g, std::vector<int>(n, n + count), ref);
    auto s = std::make_unique<st_series>();
    s->columns = {"n (slices)", "Z_n (dimensionless)", "c_n (dimensionless)"};
    for (std::size_t i = 0; i < tc.n.size(); ++i)
      s->rows.push_back({static_cast<double>(tc.n[i]), tc.z[i], tc.c[i]});
    s->headline = tc.c_th;
    s->summary = to_json(tc);
    s->summary["Z_eigen"] = ref.z_eigen;
    *out = s.release();
  });
}

st_status st_series_rows(const st_series* s, size_t* out) {
  return guarded([&] {
    need(s, "series");
    need(out, "out");
    *out = s->rows.size();
  });
}

st_status st_series_columns(const st_series* s, size_t* out) {
  return guarded([&] {
    need(s, "series");
    need(out, "out");
    *out = s->columns.size();
  });
}

const char* st_series_column_name(const st_series* s, size_t col) {
  if (!s || col >= s->columns.size()) return nullptr;
  return s->columns[col].c_str();
}

st_status st_series_value(const st_series* s, size_t row, size_t col, double* out) {
  return guarded([&] {
    need(s, "series");
    need(out, "out");
    require(row < s->rows.size() && col < s->columns.size(), Errc::invalid_argument,
            "series index out of range");
    *out = s->rows[row][col];
  });
}

st_status st_series_headline(const st_series* s, double* out) {
  return guarded([&] {
    need(s, "series");
    need(out, "out");
    *out = s->headline;
  });
}

st_status st_series_json(const st_series* s, char* buf, size_t cap, size_t* needed) {
  std::string text;
  st_status st = guarded([&] {
    need(s, "series");
    text = s->summary.dump();
  });
  if (st != ST_OK) return st;
  return write_string(text, buf, cap, needed);
}

void st_series_free(st_series* s) { delete s; }

}  // extern "C"
