#pragma once

#include <stdexcept>
#include <string>

namespace bdlmar {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or lengths that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its mathematical domain (non-positive rate, m <= h, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A treatment block with no observed outcome.
class ImputationError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure or other floating-point breakdown.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Bad command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace bdlmar
