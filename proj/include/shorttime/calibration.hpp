#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shorttime/processes.hpp"
#include "shorttime/quadrature.hpp"

namespace shorttime {

enum class CalibrationFamily { Order3Continuous, Order3Discrete, Order4Continuous, Order4Discrete };

std::string_view to_string(CalibrationFamily family);
/// Accepts "order3-continuous", "order3-discrete", "order4-continuous",
/// "order4-discrete"; throws Errc::invalid_argument otherwise.
CalibrationFamily parse_calibration_family(std::string_view name);

bool is_discrete(CalibrationFamily family);
int order_of(CalibrationFamily family);

/// Time rule used for the residual integrals. Continuous families use the
/// 64x8 sine-squared composite rule; discrete families default to the 2- and
/// 4-point Gauss-Legendre rules.
Rule1D default_time_rule(CalibrationFamily family);

/// Starting point of the solver: 3.0, 2.5, (5.7, 13.4), (6, 8).
std::vector<double> default_guess(CalibrationFamily family);

/// sum_{k=1,2} (sum_i w_i Lambda_k(u_i))^2 - 1/12. A discrete rule must
/// integrate polynomials of degree <= 2 exactly.
double residual_order3(double alpha, const Rule1D& rule);
double d_residual_order3(double alpha, const Rule1D& rule);

/// (integral of Lambda_2, sum_{i,j=0..3} c_ij^2 - 1/6) with c the Gram
/// matrix of the system under the rule. A discrete rule must integrate
/// polynomials of degree <= 3 exactly.
std::array<double, 2> residual_order4(double alpha1, double alpha2, const Rule1D& rule);
/// Row-major 2x2 Jacobian of residual_order4.
std::array<double, 4> jacobian_order4(double alpha1, double alpha2, const Rule1D& rule);

struct CalibrationRequest {
  CalibrationFamily family = CalibrationFamily::Order3Continuous;
  /// Overrides the default rule (discrete families only).
  std::optional<Rule1D> rule;
  /// Overrides default_guess.
  std::vector<double> guess;
  int max_iter = 100;
};

struct CalibrationResult {
  CalibrationFamily family = CalibrationFamily::Order3Continuous;
  Rule1D rule;
  std::vector<double> constants;
  double residual_norm = 0.0;
  int iterations = 0;

  /// LambdaSystem built from the constants.
  LambdaSystem system() const;
};

/// Levenberg-Marquardt with analytic Jacobians. Stops when max |r| < 1e-12
/// or the step falls below 1e-13; throws NotConvergedError (carrying the
/// best iterate) if max_iter is exhausted or the final norm is >= 1e-10.
CalibrationResult calibrate(const CalibrationRequest& request);

/// Default-request calibration, computed once per family and then cached.
const CalibrationResult& calibrated(CalibrationFamily family);

nlohmann::json to_json(const CalibrationResult& result);

}  // namespace shorttime
