#pragma once

#include <stdexcept>
#include <string>

namespace ncrs {

/// Invalid user-supplied configuration (bad key, bad value, impossible combination).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A caller broke a precondition (dimension mismatch, out-of-range index).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

namespace detail {

inline void require_same_dim(std::size_t got, std::size_t want, const char* where) {
  if (got != want) {
    throw ContractViolation(std::string(where) + ": dimension mismatch (got " + std::to_string(got) +
                            ", expected " + std::to_string(want) + ")");
  }
}

}  // namespace detail
}  // namespace ncrs
