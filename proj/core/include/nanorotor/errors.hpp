#pragma once

#include <stdexcept>
#include <string>

namespace nanorotor {

/// Root of all library errors. The CLI maps the three branches below onto
/// exit codes 2 (configuration), 3 (physics) and 4 (numerics).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// The requested configuration is physically unusable (blue detuning, no
/// trap, dark modes, inconsistent polarization conventions).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

class UnstableTrapError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ConventionViolationError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class DarkModeError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EquilibriumNotFoundError : public NumericalError {
 public:
  EquilibriumNotFoundError(const std::string& message, double last_residual)
      : NumericalError(message), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nanorotor
