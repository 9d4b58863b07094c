#pragma once

#include <stdexcept>
#include <string>

namespace decaysim {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An input violates a documented precondition (bad matrix entry, bad config).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An exhaustive routine was asked to run above its size cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace decaysim
