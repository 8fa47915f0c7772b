#pragma once

#include <stdexcept>
#include <string>

namespace sbmclt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised when a kernel or model file violates a structural invariant
/// (symmetry, positivity, probability vector, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

class IrreducibilityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class SubcriticalError : public Error {
 public:
  using Error::Error;
};

/// Perron eigenvalue within 1e-10 of the critical value 1. The CLT
/// machinery refuses to pick a side in that window.
class NearCriticalWarning : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class NegativeRateError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbmclt
