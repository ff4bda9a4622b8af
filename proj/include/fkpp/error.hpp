#pragma once

#include <stdexcept>
#include <string>

namespace fkpp {

/// Rejected input: malformed geometry, out-of-range parameter, bad config.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or detected a broken invariant
/// (loss of monotonicity, negative values, CG breakdown).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual = 0.0)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace fkpp
