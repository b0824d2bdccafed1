#pragma once

#include <stdexcept>
#include <string>

namespace blocknorm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: shape mismatches, mixed spaces, out-of-bounds indices.
class InputError : public Error {
 public:
  using Error::Error;
};

// A weak class appeared somewhere other than the innermost stack position.
class UnsupportedClassPosition : public Error {
 public:
  using Error::Error;
};

// A block constructor produced the empty set.
class NonvoidViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace blocknorm
