#pragma once

#include <stdexcept>
#include <string>

namespace qdb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong shapes, non-Hermitian operators, bad parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition of a formula does not hold (non-PSD state,
/// unstable drift, singular or near-pure state, support violation, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its declared accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Relative entropy with supp(rho) not contained in supp(sigma). The
/// divergence is +infinity; the value is not returned as a double.
class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace qdb
