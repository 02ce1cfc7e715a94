#pragma once

#include <stdexcept>
#include <string>

namespace dynlap {

/// Invalid user input: bad domain bounds, unsupported degree, malformed config.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Degenerate geometry, e.g. collinear point sets handed to the triangulator.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point fell outside a non-periodic domain.
class OutOfDomainError : public std::runtime_error {
 public:
  OutOfDomainError(const std::string& what, double x, double y)
      : std::runtime_error(what), x_(x), y_(y) {}
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double x_;
  double y_;
};

/// Numerical breakdown: singular Jacobians, failed factorizations, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step-count exhaustion inside the ODE integrator.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double t, double x, double y)
      : NumericalError(what), t_(t), x_(x), y_(y) {}
  double t() const { return t_; }
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double t_, x_, y_;
};

/// Caller broke a documented precondition (non-normalized vectors, size caps).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dynlap
