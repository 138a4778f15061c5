#pragma once

#include <stdexcept>
#include <string>

namespace sketchlidar {

// Invalid run or sketch configuration. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed, truncated or unreadable data file. The CLI maps this to exit code 3.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sketchlidar
