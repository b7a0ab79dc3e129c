#pragma once

#include <stdexcept>
#include <string>

namespace gfbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by inputs outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Errors raised when a numerical procedure cannot deliver its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public DomainError {
 public:
  OutOfDomain(std::string what_param, const std::string& detail)
      : DomainError("OutOfDomain(" + what_param + "): " + detail), param_(std::move(what_param)) {}
  const std::string& param() const noexcept { return param_; }

 private:
  std::string param_;
};

class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InsufficientData : public DomainError {
 public:
  using DomainError::DomainError;
};

class InterpolationError : public DomainError {
 public:
  using DomainError::DomainError;
};

class QuadratureFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonIntegrable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FactorizationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gfbm
