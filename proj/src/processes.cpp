#include "shorttime/processes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shorttime/errors.hpp"

namespace shorttime {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

bool inside01(double u) { return u >= 0.0 && u <= 1.0; }

}  // namespace

LambdaSystem LambdaSystem::order3(double alpha) {
  auto envelope = [](double u) { return std::sqrt(u * (1.0 - u)); };
  std::vector<BridgeFunction> fns{
      [=](double u) { return envelope(u) * std::cos(alpha * (u - 0.5)); },
      [=](double u) { return envelope(u) * std::sin(alpha * (u - 0.5)); },
  };
  return LambdaSystem(Order3Family{alpha}, std::move(fns),
                      {Symmetry::Symmetric, Symmetry::Antisymmetric});
}

LambdaSystem LambdaSystem::order4(double alpha1, double alpha2) {
  auto r = [](double u) {
    const double s = u * (1.0 - u);
    return std::sqrt(s * (1.0 - 3.0 * s));
  };
  auto phase = [=](double u) {
    const double c = u - 0.5;
    return alpha1 * c + alpha2 * c * c * c;
  };
  std::vector<BridgeFunction> fns{
      [](double u) { return kSqrt3 * u * (1.0 - u); },
      [=](double u) { return r(u) * std::cos(phase(u)); },
      [=](double u) { return r(u) * std::sin(phase(u)); },
  };
  return LambdaSystem(Order4Family{alpha1, alpha2}, std::move(fns),
                      {Symmetry::Symmetric, Symmetry::Symmetric, Symmetry::Antisymmetric});
}

LambdaSystem LambdaSystem::custom(std::string name, std::vector<BridgeFunction> bridge,
                                  std::vector<Symmetry> symmetry) {
  require(bridge.size() == symmetry.size(), Errc::invalid_argument,
          "LambdaSystem::custom: one symmetry tag per bridge function");
  constexpr int kSamples = 101;
  constexpr double kTol = 1e-10;
  for (std::size_t k = 0; k < bridge.size(); ++k) {
    const auto& f = bridge[k];
    require(static_cast<bool>(f), Errc::invalid_argument, "LambdaSystem::custom: empty function");
    require(std::abs(f(0.0)) < kTol && std::abs(f(1.0)) < kTol, Errc::invalid_argument,
            "LambdaSystem::custom: bridge function " + std::to_string(k + 1) +
                " must vanish at u = 0 and u = 1");
    const double sign = symmetry[k] == Symmetry::Symmetric ? 1.0 : -1.0;
    for (int i = 0; i < kSamples; ++i) {
      const double u = static_cast<double>(i) / (kSamples - 1);
      require(std::abs(f(1.0 - u) - sign * f(u)) < kTol, Errc::invalid_argument,
              "LambdaSystem::custom: bridge function " + std::to_string(k + 1) +
                  " does not have its declared time symmetry");
    }
  }
  return LambdaSystem(CustomFamily{std::move(name)}, std::move(bridge), std::move(symmetry));
}

Symmetry LambdaSystem::symmetry(int k) const {
  require(k >= 1 && k <= q(), Errc::invalid_argument, "LambdaSystem::symmetry: k out of range");
  return symmetry_[k - 1];
}

double LambdaSystem::eval(int k, double u) const {
  require(k >= 0 && k <= q(), Errc::invalid_argument, "LambdaSystem::eval: k out of range");
  if (k == 0) return u;
  if (!inside01(u)) return 0.0;
  return bridge_[k - 1](u);
}

void LambdaSystem::eval_all(double u, std::span<double> out) const {
  require(out.size() == static_cast<std::size_t>(q() + 1), Errc::invalid_argument,
          "LambdaSystem::eval_all: output span must hold q+1 values");
  out[0] = u;
  const bool in = inside01(u);
  for (int k = 1; k <= q(); ++k) out[k] = in ? bridge_[k - 1](u) : 0.0;
}

LambdaSystem LambdaSystem::time_reversed() const {
  std::vector<BridgeFunction> fns;
  fns.reserve(bridge_.size());
  for (const auto& f : bridge_) fns.push_back([f](double u) { return f(1.0 - u); });
  return LambdaSystem(family_, std::move(fns), symmetry_);
}

double LambdaSystem::variance_identity_defect(int samples) const {
  std::vector<double> vals(q() + 1);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double u = samples == 1 ? 0.5 : static_cast<double>(i) / (samples - 1);
    eval_all(u, vals);
    double s = 0.0;
    for (double v : vals) s += v * v;
    worst = std::max(worst, std::abs(s - u));
  }
  return worst;
}

CovarianceKernel CovarianceKernel::exact_brownian() { return CovarianceKernel{}; }

CovarianceKernel CovarianceKernel::finite(LambdaSystem system) {
  CovarianceKernel k;
  k.system_ = std::make_shared<const LambdaSystem>(std::move(system));
  return k;
}

double CovarianceKernel::operator()(double u, double v) const {
  require(inside01(u) && inside01(v), Errc::domain, "covariance: times must lie in [0,1]");
  if (!system_) return std::min(u, v);
  double s = u * v;
  for (int k = 1; k <= system_->q(); ++k) s += system_->eval(k, u) * system_->eval(k, v);
  return s;
}

int cell_of(double u, int cells) {
  const int c = static_cast<int>(std::floor(u * cells)) + 1;
  return std::clamp(c, 1, cells);
}

double schauder(int level, int index, double u) {
  require(level >= 1 && level < 31, Errc::invalid_argument, "schauder: level out of range");
  const int count = 1 << (level - 1);
  require(index >= 1 && index <= count, Errc::invalid_argument, "schauder: index out of range");
  const double s = count * u - index + 1;
  double tent = 0.0;
  if (s >= 0.0 && s <= 0.5) {
    tent = s;
  } else if (s > 0.5 && s <= 1.0) {
    tent = 1.0 - s;
  }
  return tent / std::sqrt(static_cast<double>(count));
}

ComposedPath::ComposedPath(LambdaSystem system, int levels,
                           std::vector<std::vector<double>> schauder_coeffs,
                           std::vector<std::vector<double>> bridge_coeffs)
    : system_(std::move(system)), levels_(levels), a_(std::move(schauder_coeffs)),
      b_(std::move(bridge_coeffs)) {
  require(levels_ >= 0 && levels_ < 24, Errc::invalid_argument, "ComposedPath: bad level count");
  require(a_.size() == static_cast<std::size_t>(levels_), Errc::invalid_argument,
          "ComposedPath: expected one Schauder coefficient row per level");
  for (int l = 1; l <= levels_; ++l)
    require(a_[l - 1].size() == (std::size_t{1} << (l - 1)), Errc::invalid_argument,
            "ComposedPath: Schauder row " + std::to_string(l) + " has the wrong length");
  require(b_.size() == static_cast<std::size_t>(system_.q()), Errc::invalid_argument,
          "ComposedPath: expected one bridge coefficient row per bridge function");
  for (const auto& row : b_)
    require(row.size() == (std::size_t{1} << levels_), Errc::invalid_argument,
            "ComposedPath: bridge rows must have 2^levels entries");
}

double ComposedPath::dilated_bridge(int l, int j, double u) const {
  const double scale = static_cast<double>(1 << levels_);
  return system_.eval(l, scale * u - j + 1) / std::sqrt(scale);
}

double ComposedPath::eval(double u) const {
  require(inside01(u), Errc::domain, "ComposedPath::eval: u must lie in [0,1]");
  double s = 0.0;
  for (int l = 1; l <= levels_; ++l) {
    const int j = cell_of(u, 1 << (l - 1));
    s += a_[l - 1][j - 1] * schauder(l, j, u);
  }
  const int j = cell_of(u, slices());
  for (int l = 1; l <= system_.q(); ++l) s += b_[l - 1][j - 1] * dilated_bridge(l, j, u);
  return s;
}

}  // namespace shorttime
