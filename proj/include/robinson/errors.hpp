#pragma once

#include <stdexcept>
#include <string>

namespace robinson {

/// Thrown when an exact enumeration would exceed its size budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for malformed experiment configuration or CLI input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace robinson
