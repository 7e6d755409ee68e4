#pragma once

#include <stdexcept>

namespace autores {

// Evaluation outside a function's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A stated precondition of an operation does not hold for the given inputs.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Computation exceeded an explicit resource budget (e.g. step count).
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The amplitude reached the floor where the phase equation divides by rho.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace autores
