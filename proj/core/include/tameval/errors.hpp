#pragma once

#include <stdexcept>
#include <string>

namespace tameval {

/// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a simulation or numerical routine produces non-finite values.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tameval
