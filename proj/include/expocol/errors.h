#ifndef EXPOCOL_ERRORS_H_
#define EXPOCOL_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace expocol {

// Grid parameters that cannot describe a periodic tensor grid.
class InvalidGridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operand shapes or representations that do not fit together.
class SizeMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a stage solve produces non-finite values or its residual keeps
// growing. `step_index()` is filled in by the time loop; -1 means "unknown".
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what, long step_index = -1)
      : std::runtime_error(what), step_index_(step_index) {}

  long step_index() const { return step_index_; }

 private:
  long step_index_;
};

// Malformed or schema-violating experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A convergence study was requested without a cached reference solution.
class MissingReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace expocol

#endif  // EXPOCOL_ERRORS_H_
