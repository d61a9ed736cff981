#pragma once

#include <stdexcept>
#include <string>

namespace mpemba {

/// Coordinate outside the landscape domain.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Landscape violates a structural requirement (e.g. a(y) <= 0).
class InvalidLandscapeError : public std::runtime_error {
 public:
  explicit InvalidLandscapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller broke an operation precondition.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

/// Numerical failure (non-convergence, divergence, degenerate distribution).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or incomplete experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mpemba
