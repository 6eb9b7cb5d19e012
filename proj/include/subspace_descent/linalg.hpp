#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

#include "subspace_descent/errors.hpp"

namespace subspace_descent {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Default size above which dense eigen-solves are refused.
inline constexpr Index kDenseEigenLimit = 4096;

/// Relative pivot threshold for the Cholesky positivity test.
inline constexpr double kPivotTolerance = 1e-14;

/// A vector in R^N stored as sorted (index, value) pairs.
struct SparseVector {
  std::vector<Index> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  double dot(const Vector& x) const;
  /// y += scale * this
  void axpy_into(double scale, Vector& y) const;
  Vector to_dense(Index dimension) const;
};

/// Symmetric matrix in dense or tridiagonal-band storage.
///
/// Symmetry is exact: dense input is rejected unless m(i,j) == m(j,i) bit for bit,
/// and the band form stores a single off-diagonal.
class SymmetricMatrix {
 public:
  enum class Storage { dense, tridiagonal };

  static SymmetricMatrix dense(Matrix entries);
  static SymmetricMatrix tridiagonal(Vector diagonal, Vector off_diagonal);
  static SymmetricMatrix identity(Index n);
  /// scale * tridiag(-1, 2, -1) of size n.
  static SymmetricMatrix laplacian_1d(Index n, double scale = 1.0);

  Index dimension() const { return n_; }
  Storage storage() const { return storage_; }
  bool is_tridiagonal() const { return storage_ == Storage::tridiagonal; }

  double operator()(Index i, Index j) const;
  Vector apply(const Vector& x) const;
  /// out += scale * M * v, touching only rows in the band around v's support.
  void apply_sparse_add(const SparseVector& v, double scale, Vector& out) const;
  /// Rows of M * v that can be nonzero, sorted and unique.
  std::vector<Index> image_support(const SparseVector& v) const;
  /// v^T M w for sparse v and w.
  double bilinear(const SparseVector& v, const SparseVector& w) const;

  double column_norm(Index j) const;
  double max_abs_diagonal() const;
  Matrix to_dense() const;
  SymmetricMatrix scaled(double factor) const;

  const Vector& band_diagonal() const { return diag_; }
  const Vector& band_off_diagonal() const { return off_; }
  const Matrix& dense_entries() const { return dense_; }

 private:
  SymmetricMatrix() = default;

  Storage storage_ = Storage::dense;
  Index n_ = 0;
  Matrix dense_;
  Vector diag_;
  Vector off_;
};

/// Symmetric positive-definite operator with an eagerly computed Cholesky factor.
///
/// Construction throws NotSpdError when any pivot falls below
/// kPivotTolerance * max|diag|. Immutable afterwards.
class SpdOperator {
 public:
  explicit SpdOperator(SymmetricMatrix matrix);

  static SpdOperator identity(Index n) { return SpdOperator(SymmetricMatrix::identity(n)); }

  const SymmetricMatrix& matrix() const { return matrix_; }
  Index dimension() const { return matrix_.dimension(); }

  Vector apply(const Vector& x) const { return matrix_.apply(x); }
  Vector solve(const Vector& b) const;
  /// Lower-triangular Cholesky factor as a dense matrix (A = L L^T).
  Matrix dense_factor() const;
  /// L x, or L^T x when transpose is set, without densifying band factors.
  Vector factor_apply(const Vector& x, bool transpose) const;

 private:
  SymmetricMatrix matrix_;
  Matrix dense_factor_;  // lower triangle, dense storage only
  Vector band_diag_;     // L(i,i), band storage only
  Vector band_sub_;      // L(i+1,i), band storage only
};

struct EigenRange {
  double min = 0.0;
  double max = 0.0;
};

double inner_product(const Vector& x, const Vector& y);
double a_inner_product(const SpdOperator& a, const Vector& x, const Vector& y);
double a_norm(const SpdOperator& a, const Vector& x);
/// ||g||_{A^{-1}} = sqrt(g . A^{-1} g)
double dual_norm(const SpdOperator& a, const Vector& g);
Vector spd_solve(const SpdOperator& a, const Vector& b);

/// Smallest and largest eigenvalue of a symmetric matrix by dense eigen-solve.
EigenRange extreme_eigenvalues(const SymmetricMatrix& m, Index dense_limit = kDenseEigenLimit);
EigenRange extreme_eigenvalues(const Matrix& symmetric, Index dense_limit = kDenseEigenLimit);

/// Extreme eigenvalues of the pencil (h, a): h v = lambda a v.
EigenRange generalized_extreme_eigenvalues(const SymmetricMatrix& h, const SpdOperator& a,
                                           Index dense_limit = kDenseEigenLimit);

void require_same_dimension(Index expected, Index actual, const char* what);
bool all_finite(const Vector& x);

}  // namespace subspace_descent
