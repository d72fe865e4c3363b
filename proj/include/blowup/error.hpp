#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace blowup {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or a formula evaluated outside its regime.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Pointwise quotient would divide by (nearly) zero on the padded grid.
class DivisorTooSmall : public Error {
 public:
  DivisorTooSmall(double min_abs, double where)
      : Error("divisor too small: min |g| = " + std::to_string(min_abs) +
              " at x = " + std::to_string(where)),
        min_abs(min_abs),
        location(where) {}
  double min_abs;
  double location;
};

class StiffnessOrSingularity : public Error {
 public:
  StiffnessOrSingularity(double t, Eigen::VectorXcd last)
      : Error("step size underflow at t = " + std::to_string(t)),
        t(t),
        last_state(std::move(last)) {}
  double t;
  Eigen::VectorXcd last_state;
};

class MaxStepsExceeded : public Error {
 public:
  MaxStepsExceeded(double t, Eigen::VectorXcd last)
      : Error("max_steps exceeded at t = " + std::to_string(t)),
        t(t),
        last_state(std::move(last)) {}
  double t;
  Eigen::VectorXcd last_state;
};

class NonFiniteRhs : public Error {
 public:
  explicit NonFiniteRhs(double t)
      : Error("rhs returned non-finite values at t = " + std::to_string(t)), t(t) {}
  double t;
};

// e^{|k Im z|} would overflow during evaluation off the real axis.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class NoRootInBracket : public Error {
 public:
  using Error::Error;
};

}  // namespace blowup
