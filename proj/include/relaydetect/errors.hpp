#pragma once

#include <stdexcept>
#include <string>

namespace relaydetect {

/// Malformed or inconsistent experiment configuration (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to reach its stated accuracy (CLI exit code 2).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relaydetect
