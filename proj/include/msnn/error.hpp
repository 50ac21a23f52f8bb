#pragma once

#include <stdexcept>
#include <string>

namespace msnn {

/// Base class for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter vector length or segment layout does not match the model.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered in a forward pass, loss, or training step.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input outside the valid physical domain (e.g. v_x below vx_min).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invariant-violating input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Simulator left its stable envelope.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace msnn
