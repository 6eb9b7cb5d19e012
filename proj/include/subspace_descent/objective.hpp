#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "subspace_descent/linalg.hpp"

namespace subspace_descent {

class QuadraticObjective;

/// Smooth function on R^N with gradient.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  /// Constant-Hessian view, when the objective is a quadratic.
  virtual const QuadraticObjective* as_quadratic() const { return nullptr; }
  virtual std::optional<double> known_minimum() const { return std::nullopt; }
};

/// f(x) = 1/2 (H x).x - x.b with H symmetric positive semidefinite.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(SymmetricMatrix hessian, Vector rhs,
                     std::optional<double> known_minimum = std::nullopt);

  Index dimension() const override { return hessian_.dimension(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const QuadraticObjective* as_quadratic() const override { return this; }
  std::optional<double> known_minimum() const override { return known_minimum_; }

  const SymmetricMatrix& hessian_matrix() const { return hessian_; }
  const Vector& rhs() const { return rhs_; }

  /// True when H passed the SPD factorization.
  bool strongly_convex() const { return spd_.has_value(); }
  /// Throws NotSpdError for a semidefinite H.
  const SpdOperator& hessian() const;

 private:
  SymmetricMatrix hessian_;
  Vector rhs_;
  std::optional<double> known_minimum_;
  std::optional<SpdOperator> spd_;
};

/// Nesterov's worst-case quadratic with intrinsic dimension r:
///
///   f(x) = (L/4) ( x_1^2 + sum_{i=1}^{r-1} (x_i - x_{i+1})^2 + x_r^2 - x_1 ),
///
/// which is 1/2 (Hx).x - b.x with H = (L/2) tridiag(-1,2,-1) on the leading r
/// coordinates and b = (L/4) e_1. For r < N the Hessian is only semidefinite.
class NesterovWorst final : public Objective {
 public:
  NesterovWorst(Index n, Index r, double lipschitz);

  Index dimension() const override { return n_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  const QuadraticObjective* as_quadratic() const override { return &quadratic_; }
  std::optional<double> known_minimum() const override;

  Index intrinsic_dimension() const { return r_; }
  double lipschitz() const { return lipschitz_; }
  bool strongly_convex() const { return r_ == n_; }

 private:
  Index n_;
  Index r_;
  double lipschitz_;
  QuadraticObjective quadratic_;
};

NesterovWorst nesterov_worst(Index n, Index r, double lipschitz);

/// H = (L/2) tridiag(-1,2,-1), b = (L/4) e_1 for the full-rank (r = N) case.
std::pair<SpdOperator, Vector> nesterov_matrix_form(Index n, double lipschitz);

/// x* = H^{-1} b; throws NotSpdError when H is singular.
Vector quadratic_minimizer(const QuadraticObjective& q);

/// Largest |central difference - gradient| over all coordinates at x.
double max_gradient_error(const Objective& f, const Vector& x, double step = 1e-5);

/// Reads a symmetric coordinate-format matrix ("N nnz" header, then 1-based
/// "i j value" upper-triangle triplets) and a right-hand side of N reals.
/// Matrices whose pattern fits in the tridiagonal band use band storage.
QuadraticObjective load_quadratic(const std::filesystem::path& matrix_file,
                                  const std::filesystem::path& rhs_file);

}  // namespace subspace_descent
