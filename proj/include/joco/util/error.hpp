#pragma once

#include <stdexcept>
#include <string>

namespace joco {

/// Raised when a computation leaves the finite floating-point range or a
/// factorization cannot be completed ("not positive definite",
/// "numerical overflow in graph", "training diverged").
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by problem evaluators for inputs outside the domain box.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace joco
