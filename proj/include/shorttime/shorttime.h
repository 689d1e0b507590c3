/* C interface to the short-time propagator library.
 *
 * Every function returns an st_status. On failure a thread-local message is
 * available from st_last_error(). Objects are opaque handles created by
 * st_*_create-style functions and released with the matching st_*_free;
 * passing NULL to a free function is a no-op. String outputs use a caller
 * buffer: when it is too small ST_BUFFER_TOO_SMALL is returned and *needed
 * holds the required size including the terminating NUL.
 */
#ifndef SHORTTIME_H
#define SHORTTIME_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ST_API __declspec(dllexport)
#else
#define ST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum st_status {
  ST_OK = 0,
  ST_INVALID_ARGUMENT = 1,
  ST_DOMAIN = 2,
  ST_NOT_CONVERGED = 3,
  ST_NUMERICAL = 4,
  ST_UNSUPPORTED = 5,
  ST_BUFFER_TOO_SMALL = 6,
  ST_INTERNAL = 99
} st_status;

typedef struct st_rule st_rule;
typedef struct st_system st_system;
typedef struct st_spec st_spec;
typedef struct st_report st_report;
typedef struct st_potential st_potential;
typedef struct st_kernel st_kernel;
typedef struct st_series st_series;

typedef struct st_params {
  double hbar;
  double mass;
  double beta;
} st_params;

typedef struct st_grid {
  double a;
  double b;
  int M;
} st_grid;

typedef enum st_family {
  ST_ORDER3_CONTINUOUS = 0,
  ST_ORDER3_DISCRETE = 1,
  ST_ORDER4_CONTINUOUS = 2,
  ST_ORDER4_DISCRETE = 3
} st_family;

ST_API const char* st_last_error(void);
ST_API const char* st_status_string(st_status status);
ST_API const char* st_version(void);

/* Quadrature rules on [0,1] (Gauss-Hermite: on the real line). */
ST_API st_status st_rule_gauss_legendre(int p, st_rule** out);
ST_API st_status st_rule_gauss_hermite(int p, st_rule** out);
ST_API st_status st_rule_composite(int cells, int panel_points, int sine_squared, st_rule** out);
ST_API st_status st_rule_custom(const double* points, const double* weights, size_t n,
                                st_rule** out);
ST_API st_status st_rule_trapezoid(st_rule** out);
ST_API st_status st_rule_size(const st_rule* rule, size_t* out);
/* Copies up to cap points and weights; ST_BUFFER_TOO_SMALL if cap < size. */
ST_API st_status st_rule_get(const st_rule* rule, double* points, double* weights, size_t cap);
ST_API void st_rule_free(st_rule* rule);

/* Finite Gaussian path systems. */
ST_API st_status st_system_order3(double alpha, st_system** out);
ST_API st_status st_system_order4(double alpha1, double alpha2, st_system** out);
/* family: "order3-continuous", "order3-discrete", "order4-continuous",
 * "order4-discrete"; constants come from the cached calibration. */
ST_API st_status st_system_calibrated(const char* family, st_system** out);
ST_API st_status st_system_q(const st_system* sys, int* out);
ST_API st_status st_system_eval(const st_system* sys, int k, double u, double* out);
ST_API st_status st_system_covariance(const st_system* sys, double u, double v, double* out);
ST_API void st_system_free(st_system* sys);

/* Calibration. guess may be NULL (defaults). constants must hold 2 values. */
ST_API st_status st_family_parse(const char* name, st_family* out);
ST_API st_status st_calibrate(st_family family, const double* guess, size_t guess_len,
                              int max_iter, double* constants, size_t* n_constants,
                              double* residual_norm, int* iterations);
ST_API st_status st_calibrate_json(st_family family, char* buf, size_t cap, size_t* needed);
ST_API st_status st_residual_order3(double alpha, const st_rule* rule, double* out);
ST_API st_status st_residual_order4(double alpha1, double alpha2, const st_rule* rule,
                                    double out[2]);

/* Moment specifications and the order verifier. */
ST_API st_status st_spec_exact(st_spec** out);
ST_API st_status st_spec_trotter(st_spec** out);
ST_API st_status st_spec_continuous(const st_system* sys, st_spec** out);
/* sys may be NULL for exact Brownian paths averaged with the rule. */
ST_API st_status st_spec_discrete(const st_system* sys, const st_rule* rule, st_spec** out);
/* family as for st_system_calibrated, plus "exact" and "trotter". */
ST_API st_status st_spec_by_name(const char* name, st_spec** out);
ST_API void st_spec_free(st_spec* spec);

ST_API st_status st_index_count(int mu, size_t* out);
ST_API st_status st_moment(const st_spec* spec, const int* j, size_t len, double* out);
ST_API st_status st_mc_moment(const st_spec* spec, const int* j, size_t len, long samples,
                              int truncation, uint64_t seed, double* mean, double* std_error);
ST_API st_status st_isserlis_quartic_check(const double* M, int dim, long samples, uint64_t seed,
                                           double* monte_carlo, double* std_error,
                                           double* pairing);

/* tol <= 0 selects the default tolerance of the spec. */
ST_API st_status st_verify_order(const st_spec* spec, int nu, double tol, st_report** out);
ST_API st_status st_report_pass(const st_report* report, int* out);
ST_API st_status st_report_max_residual(const st_report* report, double* out);
ST_API st_status st_report_size(const st_report* report, size_t* out);
ST_API st_status st_report_violated_count(const st_report* report, size_t* out);
ST_API st_status st_report_json(const st_report* report, char* buf, size_t cap, size_t* needed);
ST_API void st_report_free(st_report* report);

/* Potentials: "quartic", "harmonic" (omega = 1, m = 1), "he-cage", "free". */
ST_API st_status st_potential_by_name(const char* name, st_potential** out);
ST_API st_status st_potential_harmonic(double omega, double mass, st_potential** out);
ST_API st_status st_potential_value(const st_potential* pot, double x, double* out);
ST_API st_status st_potential_deriv1(const st_potential* pot, double x, double* out);
ST_API void st_potential_free(st_potential* pot);

/* Physical parameters and grids. */
ST_API double st_units_constant(void);
ST_API st_status st_params_kelvin_angstrom(double mass_amu, double beta_per_kelvin,
                                           st_params* out);
/* Natural parameters for a potential: hbar = m = 1, beta = 10; He cage in
 * K / Angstrom / amu at T = 5.11 K. */
ST_API st_status st_default_params(const st_potential* pot, st_params* out);
ST_API st_status st_default_grid(const st_potential* pot, st_grid* out);

/* Short-time kernels. name: "free", "trotter", or a calibrated family as
 * for st_system_calibrated; gh_points <= 0 selects the default of 10. */
ST_API st_status st_kernel_by_name(const char* name, const st_potential* pot, int gh_points,
                                   st_kernel** out);
ST_API st_status st_kernel_discrete(const st_system* sys, const st_rule* rule,
                                    const st_potential* pot, int gh_points, st_kernel** out);
ST_API st_status st_kernel_continuous(const st_system* sys, const st_potential* pot,
                                      int gh_points, st_kernel** out);
ST_API st_status st_kernel_rho0(const st_kernel* kernel, const st_params* params, double x,
                                double xp, double* out);
ST_API st_status st_rho_fp(const st_params* params, double x, double xp, double* out);
ST_API void st_kernel_free(st_kernel* kernel);

/* Numerical matrix multiplication. */
ST_API st_status st_nmm_Z(const st_kernel* kernel, const st_params* params, const st_grid* grid,
                          int n, double* out);
/* Order-4 reference; z_eigen receives NaN when check_eigensolve is 0. */
ST_API st_status st_reference_Z(const st_kernel* kernel_order4, const st_params* params,
                                const st_grid* grid, int n_ref, int check_eigensolve, double* z,
                                double* z_eigen);
ST_API st_status st_dvr_Z(const st_potential* pot, const st_params* params, const st_grid* grid,
                          double* out);
ST_API st_status st_nmm_density_ratio(const st_kernel* kernel, const st_params* params,
                                      const st_grid* grid, double x, double xp, int n,
                                      double* out);
ST_API st_status st_mc_density_ratio(const st_kernel* kernel, const st_params* params, double x,
                                     double xp, int levels, long samples, uint64_t seed,
                                     double* mean, double* std_error);

/* Diagnostic series: tabular rows plus a JSON summary. */
ST_API st_status st_order_diagnostic(const st_kernel* kernel, const st_params* params,
                                     const st_grid* grid, const int* m, size_t count,
                                     double z_ref, st_series** out);
/* n_ref <= 0 selects the default reference depth. */
ST_API st_status st_trotter_constant(const st_potential* pot, const st_params* params,
                                     const st_grid* grid, const int* n, size_t count, int n_ref,
                                     st_series** out);
ST_API st_status st_series_rows(const st_series* s, size_t* out);
ST_API st_status st_series_columns(const st_series* s, size_t* out);
ST_API const char* st_series_column_name(const st_series* s, size_t col);
ST_API st_status st_series_value(const st_series* s, size_t row, size_t col, double* out);
/* Headline number: fitted slope for order series, c_th for Trotter series. */
ST_API st_status st_series_headline(const st_series* s, double* out);
ST_API st_status st_series_json(const st_series* s, char* buf, size_t cap, size_t* needed);
ST_API void st_series_free(st_series* s);

#ifdef __cplusplus
}
#endif

#endif /* SHORTTIME_H */
