#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixlab {

// Base of every error thrown by the library. The CLI maps subclasses to exit
// codes, so new failure modes should derive from one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands live on different state spaces or have mismatched lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Absolute-continuity violation: mass where the reference has none.
class SupportError : public Error {
 public:
  SupportError(const std::string& what, std::size_t state)
      : Error(what + " (state " + std::to_string(state) + ")"), state_(state) {}
  explicit SupportError(const std::string& what) : Error(what) {}

  std::size_t state() const { return state_; }

 private:
  std::size_t state_ = static_cast<std::size_t>(-1);
};

// A certified identity or structural invariant failed after computation.
class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

class IrreducibilityError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, long iterations)
      : Error(what + " after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}

  long iterations() const { return iterations_; }

 private:
  long iterations_;
};

// Bad user-facing configuration: missing coordinates, invalid counts, schema.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixlab
