#pragma once

#include <stdexcept>
#include <string>

namespace idci {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A model/parameter combination that has no implementation (e.g. the
/// fixed-jump model with q > 0).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Root bracketing, bisection or refinement failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The optimizer could not certify its result.
class NonConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Two routes that must agree did not.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace idci
