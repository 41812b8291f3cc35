#pragma once

#include <stdexcept>
#include <string>

namespace slqr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Eigensolver failure, residual check failure, divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A gain does not render the closed loop mean-square stable.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

// The Lyapunov operator is not a contraction under the discount, so the cost
// equation has no unique solution.
class NoUniqueSolutionError : public Error {
 public:
  using Error::Error;
};

// Regression data does not have full column rank; more probing or more data
// is needed.
class ExcitationError : public Error {
 public:
  using Error::Error;
};

// Estimated Q-kernel is unusable (input block not positive definite).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace slqr
