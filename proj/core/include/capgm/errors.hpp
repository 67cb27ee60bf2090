#pragma once

#include <stdexcept>
#include <string>

namespace capgm {

/// Bad run configuration (unknown key, inconsistent options). CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A conditional produced NaN/Inf or degenerated to zero mass mid-chain.
/// Carries the sweep index and the step that failed. CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string step, long iteration, const std::string& detail)
      : std::runtime_error("numerical failure in " + step + " at iteration " +
                           std::to_string(iteration) + ": " + detail),
        step_(std::move(step)),
        iteration_(iteration) {}

  const std::string& step() const noexcept { return step_; }
  long iteration() const noexcept { return iteration_; }

 private:
  std::string step_;
  long iteration_;
};

}  // namespace capgm
