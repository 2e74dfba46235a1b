#pragma once

// Exception hierarchy shared by every hdemg module. The CLI maps DataError to
// exit code 2 and ConfigError to exit code 3.

#include <stdexcept>
#include <string>

namespace hdemg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, missing or inconsistent input data (trial files, datasets,
// model files).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters: dimensions, level counts, calibration anchors, modes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Hypervector dimension mismatch or an invalid dimension for an operation.
class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace hdemg
