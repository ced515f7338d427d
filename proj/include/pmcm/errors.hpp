#pragma once

#include <stdexcept>
#include <string>

namespace pmcm {

// Malformed input or a carrier that cannot represent the problem.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A hypothesis of the requested operation does not hold; what() names it.
class Refused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmcm
