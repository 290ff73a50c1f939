#pragma once

#include <stdexcept>
#include <string>

namespace tcof {

// Base of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor dimensions that do not fit the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed binary container (TNSR) or image file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Network-spec text that fails to parse or propagate.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Weight container that does not match the network spec.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Manifest or frame directory problems.
class IngestError : public Error {
 public:
  using Error::Error;
};

// Invalid option combinations and out-of-range parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a solver that failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tcof
