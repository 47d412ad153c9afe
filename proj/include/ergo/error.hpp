#pragma once

#include <stdexcept>
#include <string>

namespace ergo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (e.g. Schur product of a 2x2 and a 3x3).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a value was violated (negative weight, non-stochastic row, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed matrix, weight or config file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A structural numerical failure, e.g. the fixed space and the range of I - T
/// do not form a direct sum so no projection along the range exists.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ergo
