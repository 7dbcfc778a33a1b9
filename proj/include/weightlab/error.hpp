#pragma once

#include <stdexcept>
#include <string>

namespace weightlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the operation's documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed (non-finite samples, bad CSV, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A type invariant does not hold (e.g. a non-positive tabulated weight).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The requested combination is recognised but not supported.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis is violated; the message names the inequality.
class HypothesisError : public ParameterError {
 public:
  HypothesisError(std::string violated, const std::string& detail)
      : ParameterError("hypothesis violated: " + violated + " (" + detail + ")"),
        violated_(std::move(violated)) {}

  const std::string& violated() const noexcept { return violated_; }

 private:
  std::string violated_;
};

}  // namespace weightlab
