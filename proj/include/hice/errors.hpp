#pragma once

#include <stdexcept>
#include <string>

namespace hice {

/// Base of every error the engine raises for bad input. The CLI maps these to
/// exit code 1; anything else escaping is treated as an internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Zero-norm or non-finite vector where a direction is required.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

class NoReferencesError : public Error {
 public:
  using Error::Error;
};

/// Statistic undefined for the input (e.g. a constant ranking).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed syntax. The message carries "<path>:<byte offset>".
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed text that does not match the bundle or record schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Decoded data that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hice
