#pragma once

#include <stdexcept>
#include <string>

namespace erlq {

// Raised for malformed or inconsistent user input (config files, flag values,
// dimension mismatches). The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation leaves its numerical domain (divergent series,
// singular covariance, failed value iteration). The CLI maps this to exit
// code 2. `op` names the failing operation.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& op, const std::string& what)
      : std::runtime_error(op + ": " + what), op_(op) {}
  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

}  // namespace erlq
