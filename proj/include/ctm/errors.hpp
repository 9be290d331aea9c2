#pragma once

#include <stdexcept>
#include <string>

namespace ctm {

// Input outside the domain of an operation (negative density, length mismatch, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A model assumption does not hold for the given network or game.
//   1: every route has a unique minimum-capacity link
//   2: exogenous flow does not exceed the min-cut capacity
//   3: free-flow times strictly ordered and saturated times pairwise distinct
class AssumptionViolation : public std::invalid_argument {
 public:
  AssumptionViolation(int assumption, const std::string& what)
      : std::invalid_argument("assumption " + std::to_string(assumption) + " violated: " + what),
        assumption_(assumption) {}

  int assumption() const noexcept { return assumption_; }

 private:
  int assumption_;
};

// A route travel time that no consistent density vector realizes.
class UnattainableTime : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace ctm
