#pragma once

#include <stdexcept>
#include <string>

namespace fracspec {

// Evaluation outside the operator's index set or the upper half-plane.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input data: non-finite numbers, broken invariants, bad schedules.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller passed arguments that violate an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested quantity is not representable at the active precision.
class PrecisionError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Spec and ledger disagree, or a persisted artifact is internally inconsistent.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracspec
