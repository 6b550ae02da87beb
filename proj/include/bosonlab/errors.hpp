#pragma once

#include <stdexcept>
#include <string>

namespace bosonlab {

// Exception taxonomy. The CLI maps these onto exit codes: config_error -> 3,
// capacity_error / truncation_error -> 4, everything else that escapes -> 2.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched grids, bases or shapes between operands.
class structural_error : public error {
 public:
  using error::error;
};

// Input fails a declared precondition (non-Hermitian matrix, bad config value).
class validation_error : public error {
 public:
  using error::error;
};

// Argument outside the representable range (time outside a trajectory, k > n).
class range_error : public error {
 public:
  using error::error;
};

// Requested object does not fit the configured size limits.
class capacity_error : public error {
 public:
  using error::error;
};

// Amplitude lost to the particle-number cutoff exceeded its ceiling.
class truncation_error : public error {
 public:
  truncation_error(const std::string& what, double loss)
      : error(what), loss_(loss) {}
  double loss() const { return loss_; }

 private:
  double loss_;
};

// Time stepping produced NaN/Inf or failed to reach the requested accuracy.
class integration_error : public error {
 public:
  using error::error;
};

// An iterative numerical kernel failed to converge.
class numerical_error : public error {
 public:
  numerical_error(const std::string& what, double residual)
      : error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Bad configuration file or command line.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace bosonlab
