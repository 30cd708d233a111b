#pragma once

#include <stdexcept>
#include <string>

namespace paramshap {

/// Invalid input or a violated operation precondition: malformed files,
/// arity mismatches, a method asked to run on a query class it does not
/// support. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A resource-bounded computation gave up: enumeration budgets, row limits,
/// brute-force size caps. Maps to CLI exit code 1.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal self-check failed. Always a bug, never a user error.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace paramshap
