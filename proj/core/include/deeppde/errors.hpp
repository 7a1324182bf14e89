#pragma once

#include <stdexcept>
#include <string>

namespace deeppde {

// Bad shapes, bad arguments, malformed configs and files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values, solver blow-ups, diverged training runs.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace deeppde
