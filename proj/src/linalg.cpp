#include "subspace_descent/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace subspace_descent {

void require_same_dimension(Index expected, Index actual, const char* what) {
  if (expected != actual) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << expected << " vs " << actual << ")";
    throw DimensionError(msg.str());
  }
}

bool all_finite(const Vector& x) { return x.allFinite(); }

// ---------------------------------------------------------------------------
// SparseVector

double SparseVector::dot(const Vector& x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) s += values[k] * x[indices[k]];
  return s;
}

void SparseVector::axpy_into(double scale, Vector& y) const {
  for (std::size_t k = 0; k < indices.size(); ++k) y[indices[k]] += scale * values[k];
}

Vector SparseVector::to_dense(Index dimension) const {
  Vector out = Vector::Zero(dimension);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= dimension) throw DimensionError("SparseVector: index out of range");
    out[indices[k]] = values[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// SymmetricMatrix

SymmetricMatrix SymmetricMatrix::dense(Matrix entries) {
  if (entries.rows() != entries.cols()) throw DimensionError("SymmetricMatrix: matrix is not square");
  if (entries.rows() < 1) throw DimensionError("SymmetricMatrix: empty matrix");
  if (!entries.allFinite()) throw std::invalid_argument("SymmetricMatrix: non-finite entry");
  for (Index j = 0; j < entries.cols(); ++j)
    for (Index i = j + 1; i < entries.rows(); ++i)
      if (entries(i, j) != entries(j, i)) throw std::invalid_argument("SymmetricMatrix: matrix is not symmetric");
  SymmetricMatrix m;
  m.storage_ = Storage::dense;
  m.n_ = entries.rows();
  m.dense_ = std::move(entries);
  return m;
}

SymmetricMatrix SymmetricMatrix::tridiagonal(Vector diagonal, Vector off_diagonal) {
  if (diagonal.size() < 1) throw DimensionError("SymmetricMatrix: empty matrix");
  require_same_dimension(diagonal.size() - 1, off_diagonal.size(), "SymmetricMatrix::tridiagonal");
  if (!diagonal.allFinite() || !off_diagonal.allFinite())
    throw std::invalid_argument("SymmetricMatrix: non-finite entry");
  SymmetricMatrix m;
  m.storage_ = Storage::tridiagonal;
  m.n_ = diagonal.size();
  m.diag_ = std::move(diagonal);
  m.off_ = std::move(off_diagonal);
  return m;
}

SymmetricMatrix SymmetricMatrix::identity(Index n) {
  if (n < 1) throw DimensionError("SymmetricMatrix::identity: n must be >= 1");
  return tridiagonal(Vector::Ones(n), Vector::Zero(n - 1));
}

SymmetricMatrix SymmetricMatrix::laplacian_1d(Index n, double scale) {
  if (n < 1) throw DimensionError("SymmetricMatrix::laplacian_1d: n must be >= 1");
  return tridiagonal(Vector::Constant(n, 2.0 * scale), Vector::Constant(n - 1, -scale));
}

double SymmetricMatrix::operator()(Index i, Index j) const {
  if (storage_ == Storage::dense) return dense_(i, j);
  if (i == j) return diag_[i];
  if (i == j + 1) return off_[j];
  if (j == i + 1) return off_[i];
  return 0.0;
}

Vector SymmetricMatrix::apply(const Vector& x) const {
  require_same_dimension(n_, x.size(), "SymmetricMatrix::apply");
  if (storage_ == Storage::dense) return dense_ * x;
  Vector y = diag_.cwiseProduct(x);
  if (n_ > 1) {
    y.head(n_ - 1) += off_.cwiseProduct(x.tail(n_ - 1));
    y.tail(n_ - 1) += off_.cwiseProduct(x.head(n_ - 1));
  }
  return y;
}

void SymmetricMatrix::apply_sparse_add(const SparseVector& v, double scale, Vector& out) const {
  require_same_dimension(n_, out.size(), "SymmetricMatrix::apply_sparse_add");
  if (storage_ == Storage::dense) {
    for (std::size_t k = 0; k < v.nnz(); ++k) out += (scale * v.values[k]) * dense_.col(v.indices[k]);
    return;
  }
  for (std::size_t k = 0; k < v.nnz(); ++k) {
    const Index j = v.indices[k];
    const double c = scale * v.values[k];
    out[j] += c * diag_[j];
    if (j > 0) out[j - 1] += c * off_[j - 1];
    if (j + 1 < n_) out[j + 1] += c * off_[j];
  }
}

std::vector<Index> SymmetricMatrix::image_support(const SparseVector& v) const {
  std::vector<Index> rows;
  if (storage_ == Storage::dense) {
    if (v.nnz() == 0) return rows;
    rows.resize(static_cast<std::size_t>(n_));
    for (Index i = 0; i < n_; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  }
  rows.reserve(3 * v.nnz());
  for (Index j : v.indices)
    for (Index r = std::max<Index>(0, j - 1); r <= std::min<Index>(n_ - 1, j + 1); ++r) rows.push_back(r);
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

double SymmetricMatrix::bilinear(const SparseVector& v, const SparseVector& w) const {
  double s = 0.0;
  if (storage_ == Storage::dense) {
    for (std::size_t a = 0; a < v.nnz(); ++a)
      for (std::size_t b = 0; b < w.nnz(); ++b)
        s += v.values[a] * dense_(v.indices[a], w.indices[b]) * w.values[b];
    return s;
  }
  // Both index lists are sorted; walk w with a pointer that trails v.
  std::size_t b0 = 0;
  for (std::size_t a = 0; a < v.nnz(); ++a) {
    const Index i = v.indices[a];
    while (b0 < w.nnz() && w.indices[b0] < i - 1) ++b0;
    for (std::size_t b = b0; b < w.nnz() && w.indices[b] <= i + 1; ++b)
      s += v.values[a] * (*this)(i, w.indices[b]) * w.values[b];
  }
  return s;
}

double SymmetricMatrix::column_norm(Index j) const {
  if (j < 0 || j >= n_) throw std::out_of_range("SymmetricMatrix::column_norm: column out of range");
  if (storage_ == Storage::dense) return dense_.col(j).norm();
  double s = diag_[j] * diag_[j];
  if (j > 0) s += off_[j - 1] * off_[j - 1];
  if (j + 1 < n_) s += off_[j] * off_[j];
  return std::sqrt(s);
}

double SymmetricMatrix::max_abs_diagonal() const {
  if (storage_ == Storage::dense) return dense_.diagonal().cwiseAbs().maxCoeff();
  return diag_.cwiseAbs().maxCoeff();
}

Matrix SymmetricMatrix::to_dense() const {
  if (storage_ == Storage::dense) return dense_;
  Matrix m = Matrix::Zero(n_, n_);
  m.diagonal() = diag_;
  for (Index i = 0; i + 1 < n_; ++i) {
    m(i + 1, i) = off_[i];
    m(i, i + 1) = off_[i];
  }
  return m;
}

SymmetricMatrix SymmetricMatrix::scaled(double factor) const {
  SymmetricMatrix m = *this;
  if (storage_ == Storage::dense) {
    m.dense_ *= factor;
  } else {
    m.diag_ *= factor;
    m.off_ *= factor;
  }
  return m;
}

// ---------------------------------------------------------------------------
// SpdOperator

namespace {

[[noreturn]] void throw_not_spd(Index column, double pivot, double threshold) {
  std::ostringstream msg;
  msg << "matrix is not SPD: pivot " << pivot << " at column " << column << " is below threshold "
      << threshold;
  throw NotSpdError(msg.str());
}

}  // namespace

SpdOperator::SpdOperator(SymmetricMatrix matrix) : matrix_(std::move(matrix)) {
  const Index n = matrix_.dimension();
  const double threshold = kPivotTolerance * matrix_.max_abs_diagonal();

  if (matrix_.is_tridiagonal()) {
    const Vector& d = matrix_.band_diagonal();
    const Vector& e = matrix_.band_off_diagonal();
    band_diag_.resize(n);
    band_sub_.resize(n - 1);
    for (Index i = 0; i < n; ++i) {
      double pivot = d[i];
      if (i > 0) pivot -= band_sub_[i - 1] * band_sub_[i - 1];
      if (!(pivot > threshold)) throw_not_spd(i, pivot, threshold);
      band_diag_[i] = std::sqrt(pivot);
      if (i + 1 < n) band_sub_[i] = e[i] / band_diag_[i];
    }
    return;
  }

  const Matrix& a = matrix_.dense_entries();
  dense_factor_ = Matrix::Zero(n, n);
  Matrix& l = dense_factor_;
  for (Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > threshold)) throw_not_spd(j, pivot, threshold);
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
}

Vector SpdOperator::solve(const Vector& b) const {
  const Index n = dimension();
  require_same_dimension(n, b.size(), "SpdOperator::solve");
  if (matrix_.is_tridiagonal()) {
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      double s = b[i];
      if (i > 0) s -= band_sub_[i - 1] * y[i - 1];
      y[i] = s / band_diag_[i];
    }
    for (Index i = n - 1; i >= 0; --i) {
      double s = y[i];
      if (i + 1 < n) s -= band_sub_[i] * y[i + 1];
      y[i] = s / band_diag_[i];
    }
    return y;
  }
  Vector y = dense_factor_.triangularView<Eigen::Lower>().solve(b);
  dense_factor_.triangularView<Eigen::Lower>().transpose().solveInPlace(y);
  return y;
}

Matrix SpdOperator::dense_factor() const {
  if (!matrix_.is_tridiagonal()) return dense_factor_;
  const Index n = dimension();
  Matrix l = Matrix::Zero(n, n);
  l.diagonal() = band_diag_;
  for (Index i = 0; i + 1 < n; ++i) l(i + 1, i) = band_sub_[i];
  return l;
}

Vector SpdOperator::factor_apply(const Vector& x, bool transpose) const {
  const Index n = dimension();
  require_same_dimension(n, x.size(), "SpdOperator::factor_apply");
  if (!matrix_.is_tridiagonal()) {
    if (transpose) return dense_factor_.triangularView<Eigen::Lower>().transpose() * x;
    return dense_factor_.triangularView<Eigen::Lower>() * x;
  }
  Vector y = band_diag_.cwiseProduct(x);
  if (n > 1) {
    if (transpose) {
      y.head(n - 1) += band_sub_.cwiseProduct(x.tail(n - 1));
    } else {
      y.tail(n - 1) += band_sub_.cwiseProduct(x.head(n - 1));
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// Inner products and norms

double inner_product(const Vector& x, const Vector& y) {
  require_same_dimension(x.size(), y.size(), "inner_product");
  return x.dot(y);
}

double a_inner_product(const SpdOperator& a, const Vector& x, const Vector& y) {
  require_same_dimension(a.dimension(), x.size(), "a_inner_product");
  require_same_dimension(a.dimension(), y.size(), "a_inner_product");
  return a.apply(x).dot(y);
}

double a_norm(const SpdOperator& a, const Vector& x) {
  const double r = a_inner_product(a, x, x);
  if (r < 0.0) throw NotSpdError("a_norm: negative radicand, operator lost positive definiteness");
  return std::sqrt(r);
}

double dual_norm(const SpdOperator& a, const Vector& g) {
  require_same_dimension(a.dimension(), g.size(), "dual_norm");
  const double r = g.dot(a.solve(g));
  if (r < 0.0) throw NotSpdError("dual_norm: negative radicand, operator lost positive definiteness");
  return std::sqrt(r);
}

Vector spd_solve(const SpdOperator& a, const Vector& b) { return a.solve(b); }

// ---------------------------------------------------------------------------
// Eigenvalues

namespace {

void check_dense_limit(Index n, Index limit) {
  if (n > limit) {
    std::ostringstream msg;
    msg << "dense eigen-solve of size " << n << " exceeds the limit " << limit
        << "; subsample the problem or use an iterative estimate";
    throw DenseLimitError(msg.str());
  }
}

}  // namespace

EigenRange extreme_eigenvalues(const Matrix& symmetric, Index dense_limit) {
  if (symmetric.rows() != symmetric.cols()) throw DimensionError("extreme_eigenvalues: matrix is not square");
  check_dense_limit(symmetric.rows(), dense_limit);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("extreme_eigenvalues: eigen-solve failed");
  const Vector& w = solver.eigenvalues();
  return {w[0], w[w.size() - 1]};
}

EigenRange extreme_eigenvalues(const SymmetricMatrix& m, Index dense_limit) {
  check_dense_limit(m.dimension(), dense_limit);
  if (m.is_tridiagonal()) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver;
    solver.computeFromTridiagonal(m.band_diagonal(), m.band_off_diagonal(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceError("extreme_eigenvalues: eigen-solve failed");
    const Vector& w = solver.eigenvalues();
    return {w[0], w[w.size() - 1]};
  }
  return extreme_eigenvalues(m.dense_entries(), dense_limit);
}

EigenRange generalized_extreme_eigenvalues(const SymmetricMatrix& h, const SpdOperator& a,
                                           Index dense_limit) {
  require_same_dimension(a.dimension(), h.dimension(), "generalized_extreme_eigenvalues");
  check_dense_limit(h.dimension(), dense_limit);
  // L^{-1} H L^{-T} shares its spectrum with the pencil (H, A = L L^T).
  const Matrix l = a.dense_factor();
  Matrix c = l.triangularView<Eigen::Lower>().solve(h.to_dense());
  Matrix ct = c.transpose();
  Matrix m = l.triangularView<Eigen::Lower>().solve(ct);
  m = 0.5 * (m + m.transpose()).eval();
  return extreme_eigenvalues(m, dense_limit);
}

}  // namespace subspace_descent
