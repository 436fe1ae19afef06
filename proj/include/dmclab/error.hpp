#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dmclab {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (x <= 0 for the drift, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinite value reached an operation that requires finite input.
class NonFiniteInput : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The particle system degenerated (every weight underflowed, positions blew up).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NonFiniteInput(std::string(what) + ": non-finite input");
  }
}

}  // namespace detail

}  // namespace dmclab
