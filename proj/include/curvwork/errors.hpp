#pragma once

#include <stdexcept>
#include <string>

namespace curvwork {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied something outside an operation's preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation could not produce a trustworthy number.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EndpointMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateSteadyState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSolve : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnresolvedIntegrand : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroBaseline : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InstabilityDetected : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DomainExit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace curvwork
