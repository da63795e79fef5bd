#pragma once

#include <stdexcept>
#include <string>

namespace censurv {

// Bad or inconsistent configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Objective cannot be trained on the given data (CLI exit code 3).
struct UntrainableError : std::runtime_error {
  explicit UntrainableError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable, unwritable, or malformed files (CLI exit code 4).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace censurv
