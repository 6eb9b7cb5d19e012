#pragma once

#include <stdexcept>
#include <string>

namespace subspace_descent {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix failed the pivot-positivity test of the Cholesky factorization.
class NotSpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense eigen-solve requested above the configured size limit.
class DenseLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterates blew up (non-finite values or sustained growth of f).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inner iterative solve (local Newton, Lanczos) ran out of budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files or CLI parameters.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace subspace_descent
