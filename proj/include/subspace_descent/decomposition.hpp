#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "subspace_descent/linalg.hpp"

namespace subspace_descent {

/// One subspace V_i = range(I_i) with its local metric A_i and Lipschitz constant L_{A,i}.
class Subspace {
 public:
  Subspace(std::vector<SparseVector> basis, SpdOperator local_matrix, double local_lipschitz = 1.0,
           int level = 0);

  /// n_i, the number of prolongation columns.
  Index size() const { return static_cast<Index>(basis_.size()); }
  const std::vector<SparseVector>& basis() const { return basis_; }
  const SpdOperator& local_matrix() const { return local_matrix_; }
  double local_lipschitz() const { return local_lipschitz_; }
  /// Grid level for multilevel subspaces (finest = highest); 0 otherwise.
  int level() const { return level_; }

  /// R_i g = I_i^T g.
  Vector restrict_vector(const Vector& g) const;
  /// I_i c as a sparse full-space vector.
  SparseVector prolong(const Vector& c) const;

  Subspace with_local_lipschitz(double value) const;

 private:
  std::vector<SparseVector> basis_;
  SpdOperator local_matrix_;
  double local_lipschitz_;
  int level_;
};

/// V = V_1 + ... + V_J together with the global metric A.
class Decomposition {
 public:
  Decomposition(std::vector<Subspace> subspaces, SpdOperator preconditioner);

  Index dimension() const { return preconditioner_.dimension(); }
  /// J
  std::size_t size() const { return subspaces_.size(); }
  const Subspace& operator[](std::size_t i) const { return subspaces_[i]; }
  const std::vector<Subspace>& subspaces() const { return subspaces_; }
  const SpdOperator& preconditioner() const { return preconditioner_; }

  std::vector<double> local_lipschitz() const;
  /// (1/J) sum_i L_{A,i}
  double mean_lipschitz() const { return mean_lipschitz_; }
  double max_lipschitz() const;

  std::optional<double> stability_constant() const { return stability_constant_; }
  Decomposition with_stability_constant(double c) const;
  Decomposition with_local_lipschitz(std::span<const double> values) const;

  /// B g = sum_i I_i A_i^{-1} R_i g, the additive Schwarz preconditioner applied to g.
  Vector apply_additive_schwarz(const Vector& g) const;

 private:
  std::vector<Subspace> subspaces_;
  SpdOperator preconditioner_;
  double mean_lipschitz_ = 0.0;
  std::optional<double> stability_constant_;
};

/// A_i = R A I for a full-column-rank prolongation; NotSpdError flags rank deficiency.
SpdOperator galerkin_local_matrix(const SymmetricMatrix& metric, std::span<const SparseVector> prolongation);

/// J = N unit-vector subspaces.
Decomposition coordinate_decomposition(Index n, const SpdOperator& metric);

/// Disjoint index blocks (0-based) covering {0..N-1}.
Decomposition block_decomposition(const std::vector<std::vector<Index>>& partition, const SpdOperator& metric);

/// Hat-function hierarchy on N = 2^level - 1 interior grid points, ordered
/// finest level first, left to right, then successively coarser levels.
/// J = 2N - level.
Decomposition multilevel_nodal_decomposition(int level, const SpdOperator& metric);

/// Number of subspaces produced by multilevel_nodal_decomposition.
Index multilevel_subspace_count(int level);

/// lambda_max(A_i^{-1} R_i H I_i), the tightest L_{A,i} for a constant Hessian.
double local_lipschitz_quadratic(const SymmetricMatrix& hessian, const Subspace& subspace);

/// Copy of d with every L_{A,i} recomputed against the given Hessian.
Decomposition assign_quadratic_lipschitz(const Decomposition& d, const SymmetricMatrix& hessian);

/// ||a_i||_2 for column i (0-based) of the Hessian.
double rcd_column_lipschitz(const SymmetricMatrix& hessian, Index i);

/// C_A = 1 / lambda_min(sum_i I_i A_i^{-1} R_i A).
///
/// Uses a dense eigen-solve up to dense_limit; above it the smallest eigenvalue
/// is estimated by Lanczos iteration with relative tolerance 1e-6.
double stability_constant(const Decomposition& d, Index dense_limit = kDenseEigenLimit);

/// One line per subspace: "index level n_i L_{A,i}" then "row:value" pairs
/// (1-based), columns separated by " |".
void export_decomposition(const Decomposition& d, std::ostream& out);

}  // namespace subspace_descent
