#pragma once

#include <stdexcept>
#include <string>

namespace fhn {

// Argument outside the mathematical domain of an operation (non-positive
// parameter, negative cut-off argument, tail radius beyond the grid).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A structural constraint between otherwise valid inputs is violated
// (e.g. the epsilon_0 bound, basin membership, schedule ordering).
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A history integral that does not converge for the requested profile.
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite values or a failed linear solve during time stepping.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fhn
