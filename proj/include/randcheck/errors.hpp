#pragma once

#include <stdexcept>
#include <string>

namespace randcheck {

// Bad configuration or input data. CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A documented precondition of an evaluation was violated, e.g. a
// stochastic classifier handed to the grid sweep. CLI exit code 3.
class PreconditionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Non-finite loss, gradient or parameter. CLI exit code 4.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace randcheck
