#pragma once

#include <stdexcept>
#include <string>

namespace jrmq {

// Configuration / schema violation (CLI exit code 2).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Newton-Raphson failure; carries the last gradient norm and, when raised
// inside a grid build, the offending time step (CLI exit code 3).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm,
                   int step_index = -1)
      : std::runtime_error(what + (step_index >= 0
                                       ? " (time step " +
                                             std::to_string(step_index) + ")"
                                       : std::string{})),
        gradient_norm_(gradient_norm),
        step_index_(step_index) {}

  double gradient_norm() const noexcept { return gradient_norm_; }
  int step_index() const noexcept { return step_index_; }

 private:
  double gradient_norm_;
  int step_index_;
};

// Zero pivot in the tridiagonal solve.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File / stream problems (CLI exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace jrmq
