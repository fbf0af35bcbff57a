#pragma once

#include <stdexcept>
#include <string>

namespace optocav {

/// A parameter or argument lies outside the domain of an operation.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (ill-conditioned system, diverging integration).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal cross-check failed: inputs that must agree do not.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file or command line. Carries a 1-based line
/// number when the problem comes from a config file (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_ = 0;
};

}  // namespace optocav
