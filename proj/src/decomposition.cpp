#include "subspace_descent/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <utility>

namespace subspace_descent {

// ---------------------------------------------------------------------------
// Subspace

Subspace::Subspace(std::vector<SparseVector> basis, SpdOperator local_matrix, double local_lipschitz, int level)
    : basis_(std::move(basis)), local_matrix_(std::move(local_matrix)), local_lipschitz_(local_lipschitz),
      level_(level) {
  if (basis_.empty()) throw std::invalid_argument("Subspace: empty basis");
  require_same_dimension(static_cast<Index>(basis_.size()), local_matrix_.dimension(), "Subspace local matrix");
  // Zero marks a flat subspace of a semidefinite objective.
  if (!(local_lipschitz_ >= 0.0) || !std::isfinite(local_lipschitz_))
    throw std::invalid_argument("Subspace: local Lipschitz constant must be nonnegative and finite");
}

Vector Subspace::restrict_vector(const Vector& g) const {
  Vector r(size());
  for (Index k = 0; k < size(); ++k) r[k] = basis_[static_cast<std::size_t>(k)].dot(g);
  return r;
}

SparseVector Subspace::prolong(const Vector& c) const {
  require_same_dimension(size(), c.size(), "Subspace::prolong");
  if (basis_.size() == 1) {
    SparseVector out = basis_.front();
    for (double& v : out.values) v *= c[0];
    return out;
  }
  std::vector<std::pair<Index, double>> entries;
  for (std::size_t k = 0; k < basis_.size(); ++k)
    for (std::size_t t = 0; t < basis_[k].nnz(); ++t)
      entries.emplace_back(basis_[k].indices[t], c[static_cast<Index>(k)] * basis_[k].values[t]);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector out;
  for (const auto& [idx, v] : entries) {
    if (!out.indices.empty() && out.indices.back() == idx) {
      out.values.back() += v;
    } else {
      out.indices.push_back(idx);
      out.values.push_back(v);
    }
  }
  return out;
}

Subspace Subspace::with_local_lipschitz(double value) const {
  return Subspace(basis_, local_matrix_, value, level_);
}

// ---------------------------------------------------------------------------
// Decomposition

namespace {

constexpr Index kRankCheckLimit = 256;

void check_spans(const std::vector<Subspace>& subspaces, Index n) {
  Index columns = 0;
  for (const auto& s : subspaces) columns += s.size();
  if (columns < n) throw std::invalid_argument("Decomposition: fewer basis columns than the dimension");
  if (n > kRankCheckLimit) return;
  Matrix stacked(n, columns);
  Index c = 0;
  for (const auto& s : subspaces)
    for (const auto& col : s.basis()) stacked.col(c++) = col.to_dense(n);
  Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  if (qr.rank() < n) throw std::invalid_argument("Decomposition: subspaces do not span R^N");
}

}  // namespace

Decomposition::Decomposition(std::vector<Subspace> subspaces, SpdOperator preconditioner)
    : subspaces_(std::move(subspaces)), preconditioner_(std::move(preconditioner)) {
  if (subspaces_.empty()) throw std::invalid_argument("Decomposition: no subspaces");
  const Index n = preconditioner_.dimension();
  for (const auto& s : subspaces_)
    for (const auto& col : s.basis())
      for (Index idx : col.indices)
        if (idx < 0 || idx >= n) throw DimensionError("Decomposition: basis index out of range");
  check_spans(subspaces_, n);
  double sum = 0.0;
  for (const auto& s : subspaces_) sum += s.local_lipschitz();
  mean_lipschitz_ = sum / static_cast<double>(subspaces_.size());
}

std::vector<double> Decomposition::local_lipschitz() const {
  std::vector<double> out;
  out.reserve(subspaces_.size());
  for (const auto& s : subspaces_) out.push_back(s.local_lipschitz());
  return out;
}

double Decomposition::max_lipschitz() const {
  double m = 0.0;
  for (const auto& s : subspaces_) m = std::max(m, s.local_lipschitz());
  return m;
}

Decomposition Decomposition::with_stability_constant(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("stability constant must be positive");
  Decomposition d = *this;
  d.stability_constant_ = c;
  return d;
}

Decomposition Decomposition::with_local_lipschitz(std::span<const double> values) const {
  if (values.size() != subspaces_.size())
    throw DimensionError("with_local_lipschitz: need one constant per subspace");
  std::vector<Subspace> subs;
  subs.reserve(subspaces_.size());
  for (std::size_t i = 0; i < subspaces_.size(); ++i) subs.push_back(subspaces_[i].with_local_lipschitz(values[i]));
  Decomposition d(std::move(subs), preconditioner_);
  d.stability_constant_ = stability_constant_;
  return d;
}

Vector Decomposition::apply_additive_schwarz(const Vector& g) const {
  require_same_dimension(dimension(), g.size(), "apply_additive_schwarz");
  Vector out = Vector::Zero(dimension());
  for (const auto& s : subspaces_) {
    const Vector local = s.local_matrix().solve(s.restrict_vector(g));
    s.prolong(local).axpy_into(1.0, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builders

SpdOperator galerkin_local_matrix(const SymmetricMatrix& metric, std::span<const SparseVector> prolongation) {
  const Index n = static_cast<Index>(prolongation.size());
  if (n == 0) throw std::invalid_argument("galerkin_local_matrix: empty prolongation");
  Matrix local(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b) {
      const double v = metric.bilinear(prolongation[static_cast<std::size_t>(a)],
                                       prolongation[static_cast<std::size_t>(b)]);
      local(a, b) = v;
      local(b, a) = v;
    }
  try {
    return SpdOperator(SymmetricMatrix::dense(std::move(local)));
  } catch (const NotSpdError& e) {
    throw NotSpdError(std::string("galerkin_local_matrix: prolongation is rank deficient (") + e.what() + ")");
  }
}

namespace {

SparseVector unit_vector(Index i) { return SparseVector{{i}, {1.0}}; }

}  // namespace

Decomposition coordinate_decomposition(Index n, const SpdOperator& metric) {
  require_same_dimension(metric.dimension(), n, "coordinate_decomposition");
  std::vector<Subspace> subs;
  subs.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::vector<SparseVector> basis{unit_vector(i)};
    SpdOperator local = galerkin_local_matrix(metric.matrix(), basis);
    subs.emplace_back(std::move(basis), std::move(local));
  }
  return Decomposition(std::move(subs), metric);
}

Decomposition block_decomposition(const std::vector<std::vector<Index>>& partition, const SpdOperator& metric) {
  const Index n = metric.dimension();
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& block : partition) {
    if (block.empty()) throw std::invalid_argument("block_decomposition: empty block");
    for (Index i : block) {
      if (i < 0 || i >= n) throw std::invalid_argument("block_decomposition: index out of range");
      if (seen[static_cast<std::size_t>(i)]++) throw std::invalid_argument("block_decomposition: overlapping blocks");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw std::invalid_argument("block_decomposition: partition does not cover every index");

  std::vector<Subspace> subs;
  subs.reserve(partition.size());
  for (const auto& block : partition) {
    std::vector<SparseVector> basis;
    basis.reserve(block.size());
    for (Index i : block) basis.push_back(unit_vector(i));
    SpdOperator local = galerkin_local_matrix(metric.matrix(), basis);
    subs.emplace_back(std::move(basis), std::move(local));
  }
  return Decomposition(std::move(subs), metric);
}

Index multilevel_subspace_count(int level) {
  if (level < 1) throw std::invalid_argument("multilevel decomposition: level must be >= 1");
  const Index n = (Index{1} << level) - 1;
  return 2 * n - level;
}

Decomposition multilevel_nodal_decomposition(int level, const SpdOperator& metric) {
  if (level < 1) throw std::invalid_argument("multilevel decomposition: level must be >= 1");
  if (level > 30) throw std::invalid_argument("multilevel decomposition: level too large");
  const Index n = (Index{1} << level) - 1;
  require_same_dimension(n, metric.dimension(), "multilevel_nodal_decomposition (N = 2^level - 1)");

  std::vector<Subspace> subs;
  subs.reserve(static_cast<std::size_t>(multilevel_subspace_count(level)));
  for (int l = level; l >= 1; --l) {
    const Index stride = Index{1} << (level - l);
    const Index nodes = (Index{1} << l) - 1;
    for (Index j = 1; j <= nodes; ++j) {
      const Index center = j * stride;  // 1-based fine index
      SparseVector hat;
      for (Index t = -stride + 1; t <= stride - 1; ++t) {
        const Index fine = center + t;
        if (fine < 1 || fine > n) continue;
        hat.indices.push_back(fine - 1);
        hat.values.push_back(1.0 - static_cast<double>(std::abs(t)) / static_cast<double>(stride));
      }
      std::vector<SparseVector> basis{std::move(hat)};
      SpdOperator local = galerkin_local_matrix(metric.matrix(), basis);
      subs.emplace_back(std::move(basis), std::move(local), 1.0, l);
    }
  }
  return Decomposition(std::move(subs), metric);
}

// ---------------------------------------------------------------------------
// Lipschitz constants

double local_lipschitz_quadratic(const SymmetricMatrix& hessian, const Subspace& subspace) {
  const auto& basis = subspace.basis();
  const Index n = subspace.size();
  Matrix projected(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b) {
      const double v =
          hessian.bilinear(basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)]);
      projected(a, b) = v;
      projected(b, a) = v;
    }
  if (n == 1) return projected(0, 0) / subspace.local_matrix().matrix()(0, 0);
  return generalized_extreme_eigenvalues(SymmetricMatrix::dense(std::move(projected)), subspace.local_matrix())
      .max;
}

Decomposition assign_quadratic_lipschitz(const Decomposition& d, const SymmetricMatrix& hessian) {
  require_same_dimension(d.dimension(), hessian.dimension(), "assign_quadratic_lipschitz");
  std::vector<double> values;
  values.reserve(d.size());
  for (const auto& s : d.subspaces()) values.push_back(local_lipschitz_quadratic(hessian, s));
  return d.with_local_lipschitz(values);
}

double rcd_column_lipschitz(const SymmetricMatrix& hessian, Index i) { return hessian.column_norm(i); }

// ---------------------------------------------------------------------------
// Stability constant

namespace {

double stability_constant_dense(const Decomposition& d, Index dense_limit) {
  const Index n = d.dimension();
  Matrix b = Matrix::Zero(n, n);
  for (const auto& s : d.subspaces()) {
    const Index m = s.size();
    Matrix inv_local(m, m);
    for (Index k = 0; k < m; ++k) inv_local.col(k) = s.local_matrix().solve(Vector::Unit(m, k));
    for (Index p = 0; p < m; ++p) {
      const SparseVector& u = s.basis()[static_cast<std::size_t>(p)];
      for (Index q = 0; q < m; ++q) {
        const SparseVector& v = s.basis()[static_cast<std::size_t>(q)];
        const double w = inv_local(p, q);
        for (std::size_t a = 0; a < u.nnz(); ++a)
          for (std::size_t c = 0; c < v.nnz(); ++c) b(u.indices[a], v.indices[c]) += w * u.values[a] * v.values[c];
      }
    }
  }
  const Matrix l = d.preconditioner().dense_factor();
  Matrix t = l.transpose() * b * l;
  t = 0.5 * (t + t.transpose()).eval();
  const EigenRange range = extreme_eigenvalues(t, dense_limit);
  if (!(range.min > 1e-12 * range.max)) throw std::runtime_error("stability_constant: decomposition does not span R^N");
  return 1.0 / range.min;
}

double stability_constant_lanczos(const Decomposition& d) {
  constexpr double kTolerance = 1e-6;
  const Index n = d.dimension();
  const Index max_steps = std::min<Index>(n, 400);
  const SpdOperator& a = d.preconditioner();
  // L^T B L is similar to B A and symmetric.
  auto apply = [&](const Vector& x) { return a.factor_apply(d.apply_additive_schwarz(a.factor_apply(x, false)), true); };

  std::mt19937_64 engine(0x5eed);
  Vector q(n);
  for (Index i = 0; i < n; ++i) q[i] = 1.0 + static_cast<double>(engine() >> 11) * 0x1.0p-53;
  q.normalize();

  Matrix basis(n, max_steps);
  std::vector<double> alpha;
  std::vector<double> beta;
  double previous = 0.0;
  for (Index m = 0; m < max_steps; ++m) {
    basis.col(m) = q;
    Vector w = apply(q);
    alpha.push_back(q.dot(w));
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
    const double b = w.norm();

    const Index k = m + 1;
    Eigen::SelfAdjointEigenSolver<Matrix> ritz;
    Vector diag = Eigen::Map<Vector>(alpha.data(), k);
    Vector off = k > 1 ? Vector(Eigen::Map<Vector>(beta.data(), k - 1)) : Vector();
    ritz.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    const double theta = ritz.eigenvalues()[0];
    const double residual = b * std::abs(ritz.eigenvectors()(k - 1, 0));
    if (m > 0 && (residual <= kTolerance * std::abs(theta) ||
                  std::abs(theta - previous) <= 1e-3 * kTolerance * std::abs(theta))) {
      if (!(theta > 0.0)) throw std::runtime_error("stability_constant: decomposition does not span R^N");
      return 1.0 / theta;
    }
    previous = theta;
    if (b <= 1e-14) {
      if (!(theta > 0.0)) throw std::runtime_error("stability_constant: decomposition does not span R^N");
      return 1.0 / theta;
    }
    beta.push_back(b);
    q = w / b;
  }
  throw ConvergenceError("stability_constant: Lanczos iteration did not converge");
}

}  // namespace

double stability_constant(const Decomposition& d, Index dense_limit) {
  if (d.dimension() <= dense_limit) return stability_constant_dense(d, dense_limit);
  return stability_constant_lanczos(d);
}

// ---------------------------------------------------------------------------
// Export

void export_decomposition(const Decomposition& d, std::ostream& out) {
  std::ostringstream line;
  line << std::setprecision(17);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Subspace& s = d[i];
    line.str("");
    line << (i + 1) << ' ' << s.level() << ' ' << s.size() << ' ' << s.local_lipschitz();
    for (std::size_t c = 0; c < s.basis().size(); ++c) {
      if (c > 0) line << " |";
      const SparseVector& col = s.basis()[c];
      for (std::size_t k = 0; k < col.nnz(); ++k) line << ' ' << (col.indices[k] + 1) << ':' << col.values[k];
    }
    out << line.str() << '\n';
  }
}

}  // namespace subspace_descent
