#pragma once

#include <stdexcept>
#include <string>

namespace tor {

// Domain errors: a parameter lies outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Argument errors: malformed inputs (unsorted times, empty lists, size mismatch).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrecisionError : NumericalError {
  using NumericalError::NumericalError;
};

struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

struct RangeError : std::range_error {
  using std::range_error::range_error;
};

}  // namespace tor
