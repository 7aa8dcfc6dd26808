#pragma once

#include <stdexcept>
#include <string>

namespace sdsp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (filterbank range, frame sizes, unknown keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed arguments: empty buffers, mismatched shapes or lengths.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A scene spec, manifest or prediction set fails validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File system or encoding failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Reading a binary or text format failed (bad magic, truncation, schema).
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

class NoSignalError : public Error {
 public:
  using Error::Error;
};

/// An inter-channel delay is physically impossible for the array geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdsp
