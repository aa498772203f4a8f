#pragma once

#include <stdexcept>

namespace ncc {

/// Malformed input: bad dimensions, invalid design parameters, unreadable files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical precondition was violated by the data (zero denominators and the like).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ncc
