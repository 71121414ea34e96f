// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace textprune {

// Error taxonomy shared by the library and the CLI.
// The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
// NumericError -> 3.

/// Invalid configuration or CLI usage (bad flag value, bad config key, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem with input data: missing file, malformed row, id collision, ...
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during computation (non-finite loss, overflow, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace textprune
