#include "shorttime/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <Eigen/Dense>

#include "shorttime/errors.hpp"

namespace shorttime {

namespace {

constexpr double kResidualStop = 1e-12;
constexpr double kStepStop = 1e-13;
constexpr double kAcceptNorm = 1e-10;
constexpr double kSqrt3 = 1.7320508075688772935;

void check_exactness(const Rule1D& rule, int degree) {
  require(integrates_polynomials_on_01(rule, degree), Errc::invalid_argument,
          "calibration: discrete rule must integrate polynomials of degree <= " +
              std::to_string(degree) + " exactly");
}

}  // namespace

std::string_view to_string(CalibrationFamily family) {
  switch (family) {
    case CalibrationFamily::Order3Continuous: return "order3-continuous";
    case CalibrationFamily::Order3Discrete: return "order3-discrete";
    case CalibrationFamily::Order4Continuous: return "order4-continuous";
    case CalibrationFamily::Order4Discrete: return "order4-discrete";
  }
  return "unknown";
}

CalibrationFamily parse_calibration_family(std::string_view name) {
  for (auto f : {CalibrationFamily::Order3Continuous, CalibrationFamily::Order3Discrete,
                 CalibrationFamily::Order4Continuous, CalibrationFamily::Order4Discrete})
    if (to_string(f) == name) return f;
  fail(Errc::invalid_argument, "unknown calibration family '" + std::string(name) + "'");
}

bool is_discrete(CalibrationFamily family) {
  return family == CalibrationFamily::Order3Discrete || family == CalibrationFamily::Order4Discrete;
}

int order_of(CalibrationFamily family) {
  return family == CalibrationFamily::Order3Continuous || family == CalibrationFamily::Order3Discrete
             ? 3
             : 4;
}

Rule1D default_time_rule(CalibrationFamily family) {
  switch (family) {
    case CalibrationFamily::Order3Discrete: return gauss_legendre_01(2);
    case CalibrationFamily::Order4Discrete: return gauss_legendre_01(4);
    default: return composite_01(64, 8, EndpointMap::SineSquared);
  }
}

std::vector<double> default_guess(CalibrationFamily family) {
  switch (family) {
    case CalibrationFamily::Order3Continuous: return {3.0};
    case CalibrationFamily::Order3Discrete: return {2.5};
    case CalibrationFamily::Order4Continuous: return {5.7, 13.4};
    case CalibrationFamily::Order4Discrete: return {6.0, 8.0};
  }
  return {};
}

// Order 3: Lambda_1 = s cos(a c), Lambda_2 = s sin(a c), c = u - 1/2.
// d Lambda_1 / da = -c Lambda_2, d Lambda_2 / da = c Lambda_1.

double residual_order3(double alpha, const Rule1D& rule) {
  check_exactness(rule, 2);
  double i1 = 0.0, i2 = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = rule.points[i];
    const double s = std::sqrt(u * (1.0 - u));
    const double c = u - 0.5;
    i1 += rule.weights[i] * s * std::cos(alpha * c);
    i2 += rule.weights[i] * s * std::sin(alpha * c);
  }
  return i1 * i1 + i2 * i2 - 1.0 / 12.0;
}

double d_residual_order3(double alpha, const Rule1D& rule) {
  check_exactness(rule, 2);
  double i1 = 0.0, i2 = 0.0, d1 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = rule.points[i];
    const double w = rule.weights[i];
    const double s = std::sqrt(u * (1.0 - u));
    const double c = u - 0.5;
    const double l1 = s * std::cos(alpha * c);
    const double l2 = s * std::sin(alpha * c);
    i1 += w * l1;
    i2 += w * l2;
    d1 -= w * c * l2;
    d2 += w * c * l1;
  }
  return 2.0 * (i1 * d1 + i2 * d2);
}

namespace {

struct Order4Gram {
  double c[4][4] = {};
  double da1[4][4] = {};
  double da2[4][4] = {};
  double int2 = 0.0, dint2_a1 = 0.0, dint2_a2 = 0.0;
};

Order4Gram order4_gram(double a1, double a2, const Rule1D& rule, bool derivatives) {
  check_exactness(rule, 3);
  Order4Gram g;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double u = rule.points[i];
    const double w = rule.weights[i];
    const double s = u * (1.0 - u);
    const double c = u - 0.5;
    const double c3 = c * c * c;
    const double r = std::sqrt(std::max(0.0, s * (1.0 - 3.0 * s)));
    const double ph = a1 * c + a2 * c3;
    const double lam[4] = {u, kSqrt3 * s, r * std::cos(ph), r * std::sin(ph)};
    g.int2 += w * lam[2];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) g.c[a][b] += w * lam[a] * lam[b];
    if (!derivatives) continue;
    // Only Lambda_2 and Lambda_3 depend on the constants.
    const double d1[4] = {0.0, 0.0, -c * lam[3], c * lam[2]};
    const double d2[4] = {0.0, 0.0, -c3 * lam[3], c3 * lam[2]};
    g.dint2_a1 += w * d1[2];
    g.dint2_a2 += w * d2[2];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        g.da1[a][b] += w * (d1[a] * lam[b] + lam[a] * d1[b]);
        g.da2[a][b] += w * (d2[a] * lam[b] + lam[a] * d2[b]);
      }
  }
  return g;
}

}  // namespace

std::array<double, 2> residual_order4(double alpha1, double alpha2, const Rule1D& rule) {
  const Order4Gram g = order4_gram(alpha1, alpha2, rule, false);
  double sq = 0.0;
  for (const auto& row : g.c)
    for (double v : row) sq += v * v;
  return {g.int2, sq - 1.0 / 6.0};
}

std::array<double, 4> jacobian_order4(double alpha1, double alpha2, const Rule1D& rule) {
  const Order4Gram g = order4_gram(alpha1, alpha2, rule, true);
  double s1 = 0.0, s2 = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      s1 += 2.0 * g.c[a][b] * g.da1[a][b];
      s2 += 2.0 * g.c[a][b] * g.da2[a][b];
    }
  return {g.dint2_a1, g.dint2_a2, s1, s2};
}

LambdaSystem CalibrationResult::system() const {
  if (order_of(family) == 3) return LambdaSystem::order3(constants.at(0));
  return LambdaSystem::order4(constants.at(0), constants.at(1));
}

CalibrationResult calibrate(const CalibrationRequest& request) {
  require(request.max_iter >= 1, Errc::invalid_argument, "calibrate: max_iter must be >= 1");
  CalibrationResult result;
  result.family = request.family;
  if (request.rule) {
    require(is_discrete(request.family), Errc::invalid_argument,
            "calibrate: a custom rule applies to discrete families only");
    result.rule = *request.rule;
  } else {
    result.rule = default_time_rule(request.family);
  }
  const int dim = order_of(request.family) == 3 ? 1 : 2;
  std::vector<double> guess = request.guess.empty() ? default_guess(request.family) : request.guess;
  require(static_cast<int>(guess.size()) == dim, Errc::invalid_argument,
          "calibrate: guess must hold " + std::to_string(dim) + " value(s)");
  const Rule1D& rule = result.rule;

  auto eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    r.resize(dim);
    J.resize(dim, dim);
    if (dim == 1) {
      r(0) = residual_order3(x(0), rule);
      J(0, 0) = d_residual_order3(x(0), rule);
    } else {
      const auto rr = residual_order4(x(0), x(1), rule);
      const auto jj = jacobian_order4(x(0), x(1), rule);
      r << rr[0], rr[1];
      J << jj[0], jj[1], jj[2], jj[3];
    }
  };

  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(guess.data(), dim);
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  eval(x, r, J);
  double lambda = 1e-3;
  int it = 0;
  bool done = r.cwiseAbs().maxCoeff() < kResidualStop;
  while (!done && it < request.max_iter) {
    ++it;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-300);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      Eigen::VectorXd xn = x + step, rn;
      Eigen::MatrixXd Jn;
      eval(xn, rn, Jn);
      if (rn.allFinite() && rn.squaredNorm() <= r.squaredNorm()) {
        x = xn;
        r = rn;
        J = Jn;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (step.cwiseAbs().maxCoeff() < kStepStop) done = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
    if (r.cwiseAbs().maxCoeff() < kResidualStop) done = true;
  }
  result.constants.assign(x.data(), x.data() + dim);
  result.residual_norm = r.norm();
  result.iterations = it;
  if (result.residual_norm >= kAcceptNorm)
    throw NotConvergedError("calibrate: " + std::string(to_string(request.family)) +
                                " did not converge (residual norm " +
                                std::to_string(result.residual_norm) + ")",
                            result.constants, result.residual_norm);
  return result;
}

const CalibrationResult& calibrated(CalibrationFamily family) {
  static std::mutex mutex;
  static std::optional<CalibrationResult> cache[4];
  const std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[static_cast<int>(family)];
  if (!slot) slot = calibrate(CalibrationRequest{family, std::nullopt, {}, 100});
  return *slot;
}

nlohmann::json to_json(const CalibrationResult& result) {
  return {{"family", std::string(to_string(result.family))},
          {"rule",
           {{"kind", std::string(to_string(result.rule.kind))},
            {"size", result.rule.size()},
            {"points", is_discrete(result.family) ? nlohmann::json(result.rule.points)
                                                  : nlohmann::json::array()},
            {"weights", is_discrete(result.family) ? nlohmann::json(result.rule.weights)
                                                   : nlohmann::json::array()}}},
          {"constants", result.constants},
          {"residual_norm", result.residual_norm},
          {"iterations", result.iterations}};
}

}  // namespace shorttime
