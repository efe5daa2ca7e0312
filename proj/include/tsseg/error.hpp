#pragma once

#include <stdexcept>
#include <string>

namespace tsseg {

/// Precondition violated by a caller-supplied value (shape, range, ordering).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Missing, truncated or inconsistent files on disk. Messages name the path.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsseg
