#pragma once

#include <stdexcept>
#include <string>

namespace stragglar {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A cluster size the requested operation can never accept (n < 2 and the like).
class InvalidSizeError : public Error {
 public:
  using Error::Error;
};

// A cluster size that is valid in general but not for this generator or
// formula, e.g. odd n for StragglAR or non-power-of-2 n for RHD.
class UnsupportedSizeError : public Error {
 public:
  using Error::Error;
};

// Malformed schedule JSON or a schedule that violates its structural shape.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A proof obligation of a generator failed while it was running. Seeing one
// of these means the generator has a bug, not that the input was bad.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace stragglar
