#pragma once

#include <stdexcept>
#include <string>

namespace hybridaug {

/// Base class for every error raised by the library. Subclasses map one-to-one
/// onto the failure categories callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

class MissingData : public Error {
 public:
  using Error::Error;
};

class DegenerateReference : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace hybridaug
