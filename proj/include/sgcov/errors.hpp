#pragma once

#include <stdexcept>
#include <string>

namespace sgcov {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// An integrand returned NaN or infinity at an interior node.
class NonFiniteEvaluation : public Error {
 public:
  using Error::Error;
};

/// Panel contributions of a semi-infinite integral stopped decreasing.
class SlowDecay : public Error {
 public:
  using Error::Error;
};

/// A nested integral hit its integrand-evaluation ceiling.
class PerformanceBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class EmptyField : public Error {
 public:
  using Error::Error;
};

class WindowTooSmall : public Error {
 public:
  using Error::Error;
};

/// Association table could not be filled within the candidate-UE budget.
class AttemptBudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace sgcov
