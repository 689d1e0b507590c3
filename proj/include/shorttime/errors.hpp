#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace shorttime {

enum class Errc {
  invalid_argument = 1,
  domain = 2,
  not_converged = 3,
  numerical = 4,
  unsupported = 5,
};

/// Base exception for the library. The code maps one-to-one onto the C API
/// status values.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by iterative solvers; carries the best iterate found.
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& what, std::vector<double> best, double residual)
      : Error(Errc::not_converged, what), best_(std::move(best)), residual_(residual) {}
  const std::vector<double>& best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_;
  double residual_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace shorttime
