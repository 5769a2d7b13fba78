#ifndef MANP_ERRORS_HPP
#define MANP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace manp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or inconsistent input shapes. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed. Maps to CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IncompatibleSource : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LinearSolveFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MissingHistory : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateQuadratic : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonpositiveConcentration : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NewtonDivergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Wraps a failure inside a time step with the step index.
class StepFailure : public NumericalError {
 public:
  StepFailure(long step, const std::string& what)
      : NumericalError("step " + std::to_string(step) + ": " + what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Malformed artifact files (CSV, manifest, checkpoint).
class ParseError : public Error {
 public:
  using Error::Error;
};

class MetadataMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace manp

#endif  // MANP_ERRORS_HPP
