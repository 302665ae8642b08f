#pragma once

#include <stdexcept>
#include <string>

namespace ienergy {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or domain violation in a call (bad parameter, wrong size).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or schema-violating configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, parsed or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed in a way the caller asked to treat as fatal.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ienergy
