#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stabilizer {

/// Base class of every domain error raised by the library. `kind()` is a
/// stable, machine-readable name used in CLI error objects.
class Error : public std::runtime_error {
 public:
  Error(std::string_view kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// A matrix that must lie in W (no eigenvalue at -1) is at, or numerically
/// near, the boundary of W.
class NotInW : public Error {
 public:
  explicit NotInW(const std::string& message) : Error("NotInW", message) {}
};

/// Unitarity drift could not be repaired, or the closed loop violated a
/// numerical guarantee the integrator is supposed to keep.
class IntegratorTolerance : public Error {
 public:
  explicit IntegratorTolerance(const std::string& message)
      : Error("IntegratorTolerance", message) {}
};

/// The two-step switch predicate never held within the period budget.
class SwitchNeverReached : public Error {
 public:
  explicit SwitchNeverReached(const std::string& message)
      : Error("SwitchNeverReached", message) {}
};

/// Too few samples to fit a convergence rate.
class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& message)
      : Error("InsufficientData", message) {}
};

/// A value-type invariant (unitarity, skew-Hermiticity, shape) was violated
/// on construction.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& message)
      : Error("InvariantViolation", message) {}
};

}  // namespace stabilizer
