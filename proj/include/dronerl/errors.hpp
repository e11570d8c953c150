#pragma once

#include <stdexcept>

namespace dronerl {

/// Invalid configuration or scenario (bad spawn, bad radii, unknown key).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse by the caller (wrong action count, stepping a finished episode).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed map or scenario text; messages carry the row/column.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Procedural generation could not satisfy its constraints.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values surfaced during sampling or optimization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dronerl
