#pragma once

#include <stdexcept>
#include <string>

namespace ssdm {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violated a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File or stream could not be read/written/parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A computation produced non-finite or otherwise unusable values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Probability mass vanished in a likelihood recursion; reported separately
/// from invalid input so callers can distinguish model failure from misuse.
class UnderflowError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ssdm
