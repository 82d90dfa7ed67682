#pragma once

#include <stdexcept>
#include <string>

namespace sharpcal {

// Base of every error the library raises. The CLI maps each subclass onto a
// distinct exit code (see tools/cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument to an operation (empty list, out-of-range parameter, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A type invariant is violated (non-monotone tabulation, length mismatch).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Moments requested for a law that has neither closed-form moments nor a
// bounded support for quadrature.
class UnsupportedDistribution : public Error {
 public:
  using Error::Error;
};

// Malformed JSON input or unknown distribution/scenario type.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed (root bracketing, non-finite result).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Calibration completion left (0,1) or produced a non-monotone quantile.
class InfeasibleCompletion : public NumericError {
 public:
  InfeasibleCompletion(const std::string& what, double p)
      : NumericError(what), p_(p) {}
  double offending_p() const noexcept { return p_; }

 private:
  double p_;
};

// Random search found no feasible candidate within its budget.
class SearchFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace sharpcal
