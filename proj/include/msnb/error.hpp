#pragma once

#include <stdexcept>
#include <string>

namespace msnb {

/// Base class for every error raised by the library. The CLI maps each
/// subclass to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
  virtual const char* kind() const noexcept { return "error"; }
};

/// Bad flags, bad configuration keys, contract violations by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
  const char* kind() const noexcept override { return "usage"; }
};

/// Input data that violates a dataset or parameter invariant.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
  const char* kind() const noexcept override { return "data_validation"; }
};

/// Overflow, singular matrices, non-finite densities at accepted states.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
  const char* kind() const noexcept override { return "numerical"; }
};

}  // namespace msnb
