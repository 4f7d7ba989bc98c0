#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace evosync {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad indices: unknown region, strategy outside a population's set, self-switch.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented invariant (ranges, simplex sums, weights).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Run-time configuration that turned out to be insufficient, e.g. a switch-rate
// bound that the dynamics exceeded.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Non-finite vector field during integration. Carries the offending state.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::vector<double> state)
      : Error(what), state_(std::move(state)) {}
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  std::vector<double> state_;
};

}  // namespace evosync
