#pragma once

#include <stdexcept>
#include <string>

namespace chtwin {

// Base of every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation precondition (bad count, range, fraction...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A value type failed re-validation (e.g. an AP inside an obstacle on load).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Linear system without a unique solution.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling gave up placing an access point.
class PlacementError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace chtwin
