#pragma once

#include <stdexcept>
#include <string>

namespace pufmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector lengths or stage counts that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters: bad architecture spec, out-of-range correlation, etc.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested conditioning cannot be realized by the simulated population
/// (too many observed CRPs, or no retained consistency group).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Numerical routine failed to reach its tolerance within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace pufmc
