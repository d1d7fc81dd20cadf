#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mpk {

/// Raised when a caller breaks an operation's precondition (shape, precision,
/// structural invariants). These indicate programming errors, not bad data.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public ContractViolation {
 public:
  DimensionMismatch(const std::string& where, std::size_t expected, std::size_t got)
      : ContractViolation(where + ": dimension mismatch (expected " + std::to_string(expected) +
                          ", got " + std::to_string(got) + ")") {}
};

class PrecisionMismatch : public ContractViolation {
 public:
  PrecisionMismatch(const std::string& where, long expected, long got)
      : ContractViolation(where + ": precision mismatch (" + std::to_string(expected) + " vs " +
                          std::to_string(got) + " bits)") {}
};

}  // namespace mpk
