#pragma once

#include <stdexcept>
#include <string>

namespace superlattice {

// Input outside the physical domain of an operation (band, angle range, sign).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration or scenario content. `key()` names the offending field
// when one is known.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& message, std::string key = {})
      : std::invalid_argument(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// A physical quantity in a scenario file without a recognized unit.
class UnitError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NoPhaseMatchingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fringe observables could not be extracted (no oscillation in the window).
class MetricsUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace superlattice
