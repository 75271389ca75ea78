#pragma once

#include <stdexcept>
#include <string>

namespace beamwave {

/// Invalid parameters or configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A spectral integral that does not converge for the requested scale limit.
class DivergenceError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A numerical invariant (norm conservation, positivity, factorization) was
/// violated at run time. Maps to CLI exit code 3.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace beamwave
