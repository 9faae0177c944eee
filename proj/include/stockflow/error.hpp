// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace stockflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad references, broken invariants, bad files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Expression parse failure; `position` is a 0-based byte offset.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ValidationError(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Failure while evaluating a model: unbound names, division by zero,
/// non-finite state, step size underflow.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

/// Feet that cannot be glued, arity mismatches in a wiring pattern.
class CompositionError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace stockflow
