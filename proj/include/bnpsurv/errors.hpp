#pragma once

#include <stdexcept>
#include <string>

namespace bnpsurv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad argument, bad option).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or does not satisfy the sample contract.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical or structural invariant failed (degenerate weights,
/// out-of-range acceptance probabilities, runaway rejection loops).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bnpsurv
