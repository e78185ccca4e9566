#pragma once

#include <stdexcept>
#include <string>

namespace mmchain {

/// Malformed or inconsistent input data (ragged columns, bad labels,
/// misaligned covariates, degenerate series).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator could not produce a usable fit.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mmchain
