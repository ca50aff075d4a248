#pragma once

#include <stdexcept>
#include <string>

namespace homlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the inputs was violated (bad dimensions, out-of-range parameters).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The requested tensor order/dimension exceeds the configured engine limits.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A numerical routine could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A run configuration is malformed or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Reading an input or writing a report failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace homlab
