#pragma once

#include <stdexcept>
#include <string>

namespace flipst {

/// Invalid input, configuration, or file contents.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown (non-finite values, loss of positive definiteness).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace flipst
