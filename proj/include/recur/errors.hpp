#pragma once

#include <stdexcept>

namespace recur {

// Invalid arguments or violated preconditions. CLI maps this to exit code 1.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configured enumeration or iteration budget ran out. CLI maps this to exit
// code 2. Never thrown for wrong answers, only for refused work.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace recur
