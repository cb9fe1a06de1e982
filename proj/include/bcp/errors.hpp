#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bcp {

// Sorted covariate indices.
using IndexSet = std::vector<int>;

/// Invalid model or procedure parameters supplied by the caller.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Data outside the domain an operation accepts (e.g. zeros passed to a
/// log-likelihood, rows violating the model constraint).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A documented precondition of an algorithm was violated. Treated as an
/// internal invariant breach by the CLI.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace bcp
