#pragma once

#include <stdexcept>
#include <string>

namespace heisenlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two objects that must share a basis do not.
class BasisMismatch : public Error {
 public:
  using Error::Error;
};

/// A dense matrix would not fit the configured memory budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// An operation that requires a hermitian operator received something else.
class NotHermitian : public Error {
 public:
  using Error::Error;
};

/// Eigensolver failure, non-finite values and similar.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace heisenlab
