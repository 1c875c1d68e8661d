#pragma once

#include <stdexcept>
#include <string>

namespace dynrank {

/// Invalid inputs (bad shapes, out-of-range parameters, malformed files).
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Iterative routine failed to reach its tolerance; carries the final residual.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace dynrank
