#pragma once

#include <stdexcept>
#include <string>

namespace ustat {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model or configuration (bad probability vector, reducible chain,
// unknown kernel name, out-of-range parameter, malformed JSON).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An exact enumeration would exceed its budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Standardization was requested for a statistic whose variance is zero or
// numerically indistinguishable from zero.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

// Inputs violate the precondition of an inequality or operation.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace ustat
