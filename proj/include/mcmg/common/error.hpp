// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mcmg {

// Non-conformable operand shapes. Message names the offending shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf where a finite value is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unusable input data: unreadable files, malformed records, bad ids.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A container file that is truncated, corrupt, or from another version.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace mcmg
