#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "shorttime/kernels.hpp"
#include "shorttime/moments.hpp"

namespace shorttime {

/// Uniform grid x_i = a + i (b - a) / M, 0 <= i <= M.
struct SpatialGrid {
  double a = -4.0;
  double b = 4.0;
  int M = 400;

  void validate() const;
  double h() const { return (b - a) / M; }
  double x(int i) const { return a + i * h(); }
  int size() const { return M + 1; }

  /// [-4,4] x 400 for the quartic, [0,L] x 500 for the He cage,
  /// [-6,6] x 400 otherwise.
  static SpatialGrid default_for(const Potential& potential);
};

struct KernelMatrix {
  Eigen::MatrixXd A;   // A_ij = h rho_0(x_i, x_j; beta / (n+1))
  double slice_beta = 0.0;
  int n = 0;
};

/// Upper triangle computed (rows in parallel), then mirrored.
KernelMatrix build_matrix(const ShortTimeKernel& kernel, const PhysicalParams& params,
                          const SpatialGrid& grid, int n);

/// A^p by square-and-multiply, p >= 1.
Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& A, int p);

/// tr(A^{n+1}); the trace is accumulated in long double. Throws
/// Errc::numerical if the result is not finite.
double partition_function(const KernelMatrix& matrix);
double partition_function(const Eigen::MatrixXd& A, int n);

/// Z_n for the kernel composed n+1 times on the grid.
double nmm_Z(const ShortTimeKernel& kernel, const PhysicalParams& params, const SpatialGrid& grid,
             int n);

/// rho_n(x_i, x_j; beta) = (A^{n+1})_ij / h.
Eigen::MatrixXd nmm_density(const ShortTimeKernel& kernel, const PhysicalParams& params,
                            const SpatialGrid& grid, int n);

/// Sinc-DVR (Colbert-Miller) eigenvalues of H on the grid interior; grid
/// points with V > potential_cap are dropped.
Eigen::VectorXd dvr_energies(const Potential& potential, const PhysicalParams& params,
                             const SpatialGrid& grid, double potential_cap = 1e6);
double dvr_Z(const Potential& potential, const PhysicalParams& params, const SpatialGrid& grid,
             double potential_cap = 1e6);

struct ReferenceZ {
  double z = 0.0;        // extrapolated
  double z_n = 0.0;      // Z at n_ref
  double z_half = 0.0;   // Z at (n_ref + 1) / 2 - 1
  int n_ref = 0;
  double z_eigen = 0.0;  // independent eigensolve, NaN if skipped
  double rel_diff = 0.0;
  std::vector<double> density;  // rho(x_i, x_i; beta) at n_ref
};

/// build_matrix drops entries with (x - x')^2 / (2 sigma^2) above this value.
inline constexpr double kFreeExponentCutoff = 80.0;
inline constexpr int kDefaultReferenceN = 511;

/// Order-4 NMM at n_ref and (n_ref+1)/2 - 1 slices, Richardson-extrapolated
/// in (n+1)^{-4}. With check_eigensolve the result is compared with dvr_Z
/// and a relative disagreement above 1e-5 throws Errc::numerical.
ReferenceZ reference_Z(const ShortTimeKernel& kernel_order4, const PhysicalParams& params,
                       const SpatialGrid& grid, int n_ref = kDefaultReferenceN,
                       bool check_eigensolve = true);

struct LadderPoint {
  int n = 0;
  double z = 0.0;
  double r = 0.0;  // Z_n / Z
};

struct OrderDiagnostics {
  std::string kernel;
  double z_ref = 0.0;
  std::vector<LadderPoint> ladder;
  std::vector<int> m;
  std::vector<double> alpha;
  double slope = 0.0;
  double intercept = 0.0;
  int fit_first_m = 0;
  int fit_last_m = 0;
  bool monotone = true;  // Z_n decreasing in n along the ladder
  std::vector<std::string> warnings;
};

/// alpha_m = m^2 ln(1 + (R_{2m-1} - R_{2m+1}) / (R_{2m+1} - 1)), slope by
/// least squares over the trailing half of the m values kept. The series is
/// cut where |R_{2m+1} - 1| < 1e-13.
OrderDiagnostics order_diagnostic(const ShortTimeKernel& kernel, const PhysicalParams& params,
                                  const SpatialGrid& grid, const std::vector<int>& m_list,
                                  double z_ref);

/// Ordinary least squares line through (x, y): {slope, intercept}.
std::pair<double, double> least_squares_line(const std::vector<double>& x,
                                             const std::vector<double>& y);

struct TrotterConstantSeries {
  double z_ref = 0.0;
  double c_th = 0.0;
  std::vector<int> n;
  std::vector<double> z;
  std::vector<double> c;
  double rel_dev_last = 0.0;  // |c_n - c_th| / c_th at the largest n
};

/// c_th = hbar^2 beta^3 / (24 m) * sum V'(x_i)^2 rho_i / sum rho_i.
double trotter_constant_theory(const Potential& potential, const PhysicalParams& params,
                               const SpatialGrid& grid, const std::vector<double>& density);

/// c_n = (n+1)^2 (Z_n - Z) / Z for the trapezoidal Trotter kernel.
TrotterConstantSeries trotter_constant(const Potential& potential, const PhysicalParams& params,
                                       const SpatialGrid& grid, const std::vector<int>& n_list,
                                       const ReferenceZ& reference);

/// Monte Carlo estimate of rho_n(x,x';beta) / rho_fp(x,x';beta) with
/// n = 2^levels - 1 and composed Levy-Ciesielski paths carrying one dilated
/// copy of the kernel's bridge system per cell.
McEstimate mc_density_ratio(const ShortTimeKernel& kernel, const PhysicalParams& params, double x,
                            double xp, int levels, long samples, std::uint64_t seed = 7);

/// rho_n(x,x';beta) / rho_fp from NMM; x and x' must be grid points.
double nmm_density_ratio(const ShortTimeKernel& kernel, const PhysicalParams& params,
                         const SpatialGrid& grid, double x, double xp, int n);

nlohmann::json to_json(const OrderDiagnostics& d);
nlohmann::json to_json(const TrotterConstantSeries& s);

}  // namespace shorttime
