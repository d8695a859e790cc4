#pragma once

#include <stdexcept>
#include <string>

namespace sgr {

// Error taxonomy mirrored by the CLI exit codes: 1 usage, 2 data, 3 runtime.

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sgr
