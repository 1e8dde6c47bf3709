// vcqc - virtual camera quality control for printed filaments
//
// Error types. Each category maps onto a CLI exit code.

#ifndef VCQC_ERROR_HPP
#define VCQC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vcqc {

/// Bad user configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on an API call with bad arguments.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal invariant failure (exit code 4).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace vcqc

#endif  // VCQC_ERROR_HPP
