#pragma once

#include <stdexcept>
#include <string>

namespace radonlab {

/// Argument outside the mathematical domain of an operation (t <= 0, p < 1, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exact integer arithmetic left the int64 range.
class overflow_error : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// An enumeration or quadrature would exceed its configured work budget.
class budget_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stated precondition does not hold (insufficient padding, overlapping bumps, ...).
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid experiment configuration; the message names the offending field.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace radonlab
