#include "subspace_descent/objective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace subspace_descent {

// ---------------------------------------------------------------------------
// QuadraticObjective

namespace {

std::optional<SpdOperator> try_factor(const SymmetricMatrix& h) {
  try {
    return SpdOperator(h);
  } catch (const NotSpdError&) {
    return std::nullopt;
  }
}

}  // namespace

QuadraticObjective::QuadraticObjective(SymmetricMatrix hessian, Vector rhs,
                                       std::optional<double> known_minimum)
    : hessian_(std::move(hessian)), rhs_(std::move(rhs)), known_minimum_(known_minimum) {
  require_same_dimension(hessian_.dimension(), rhs_.size(), "QuadraticObjective");
  if (!rhs_.allFinite()) throw std::invalid_argument("QuadraticObjective: non-finite right-hand side");
  spd_ = try_factor(hessian_);
}

double QuadraticObjective::value(const Vector& x) const {
  return 0.5 * hessian_.apply(x).dot(x) - x.dot(rhs_);
}

Vector QuadraticObjective::gradient(const Vector& x) const { return hessian_.apply(x) - rhs_; }

const SpdOperator& QuadraticObjective::hessian() const {
  if (!spd_) throw NotSpdError("quadratic objective is not strongly convex (Hessian is singular)");
  return *spd_;
}

// ---------------------------------------------------------------------------
// Nesterov's worst function

namespace {

void check_nesterov_params(Index n, Index r, double lipschitz) {
  if (n < 1) throw std::invalid_argument("nesterov_worst: N must be >= 1");
  if (r < 1 || r > n) throw std::invalid_argument("nesterov_worst: r must satisfy 1 <= r <= N");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    throw std::invalid_argument("nesterov_worst: L must be positive and finite");
}

SymmetricMatrix nesterov_hessian(Index n, Index r, double lipschitz) {
  Vector diag = Vector::Zero(n);
  Vector off = Vector::Zero(n - 1);
  diag.head(r).setConstant(lipschitz);
  if (r > 1) off.head(r - 1).setConstant(-0.5 * lipschitz);
  return SymmetricMatrix::tridiagonal(std::move(diag), std::move(off));
}

Vector nesterov_rhs(Index n, double lipschitz) {
  Vector b = Vector::Zero(n);
  b[0] = 0.25 * lipschitz;
  return b;
}

double nesterov_minimum(Index r, double lipschitz) {
  return lipschitz / 16.0 * (-1.0 + 1.0 / static_cast<double>(r + 1));
}

QuadraticObjective make_nesterov_quadratic(Index n, Index r, double lipschitz) {
  check_nesterov_params(n, r, lipschitz);
  return QuadraticObjective(nesterov_hessian(n, r, lipschitz), nesterov_rhs(n, lipschitz),
                            nesterov_minimum(r, lipschitz));
}

}  // namespace

NesterovWorst::NesterovWorst(Index n, Index r, double lipschitz)
    : n_(n), r_(r), lipschitz_(lipschitz), quadratic_(make_nesterov_quadratic(n, r, lipschitz)) {}

double NesterovWorst::value(const Vector& x) const {
  require_same_dimension(n_, x.size(), "NesterovWorst::value");
  double s = x[0] * x[0] + x[r_ - 1] * x[r_ - 1];
  for (Index i = 0; i + 1 < r_; ++i) {
    const double d = x[i] - x[i + 1];
    s += d * d;
  }
  return 0.25 * lipschitz_ * (s - x[0]);
}

Vector NesterovWorst::gradient(const Vector& x) const {
  require_same_dimension(n_, x.size(), "NesterovWorst::gradient");
  Vector g = Vector::Zero(n_);
  g[0] += 2.0 * x[0] - 1.0;
  g[r_ - 1] += 2.0 * x[r_ - 1];
  for (Index i = 0; i + 1 < r_; ++i) {
    const double d = 2.0 * (x[i] - x[i + 1]);
    g[i] += d;
    g[i + 1] -= d;
  }
  return 0.25 * lipschitz_ * g;
}

std::optional<double> NesterovWorst::known_minimum() const { return nesterov_minimum(r_, lipschitz_); }

NesterovWorst nesterov_worst(Index n, Index r, double lipschitz) { return NesterovWorst(n, r, lipschitz); }

std::pair<SpdOperator, Vector> nesterov_matrix_form(Index n, double lipschitz) {
  check_nesterov_params(n, n, lipschitz);
  return {SpdOperator(SymmetricMatrix::laplacian_1d(n, 0.5 * lipschitz)), nesterov_rhs(n, lipschitz)};
}

Vector quadratic_minimizer(const QuadraticObjective& q) { return q.hessian().solve(q.rhs()); }

double max_gradient_error(const Objective& f, const Vector& x, double step) {
  const Vector g = f.gradient(x);
  double worst = 0.0;
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f.value(probe);
    probe[i] = x[i] - step;
    const double down = f.value(probe);
    probe[i] = x[i];
    worst = std::max(worst, std::abs((up - down) / (2.0 * step) - g[i]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// File input

namespace {

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '%' || line[first] == '#') continue;
    return true;
  }
  return false;
}

[[noreturn]] void bad_input(const std::filesystem::path& file, const std::string& what) {
  throw InputError(file.string() + ": " + what);
}

}  // namespace

QuadraticObjective load_quadratic(const std::filesystem::path& matrix_file,
                                  const std::filesystem::path& rhs_file) {
  std::ifstream in(matrix_file);
  if (!in) bad_input(matrix_file, "cannot open");
  std::string line;
  if (!next_data_line(in, line)) bad_input(matrix_file, "missing header");
  long long n = 0, nnz = 0;
  {
    std::istringstream header(line);
    if (!(header >> n >> nnz) || n < 1 || nnz < 0) bad_input(matrix_file, "header must be 'N nnz'");
  }

  Matrix entries = Matrix::Zero(n, n);
  bool banded = true;
  for (long long k = 0; k < nnz; ++k) {
    if (!next_data_line(in, line)) bad_input(matrix_file, "fewer triplets than declared");
    std::istringstream row(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(row >> i >> j >> v)) bad_input(matrix_file, "malformed triplet '" + line + "'");
    if (i < 1 || j < 1 || i > n || j > n) bad_input(matrix_file, "index out of range in '" + line + "'");
    if (i > j) bad_input(matrix_file, "entries must be in the upper triangle (i <= j)");
    if (!std::isfinite(v)) bad_input(matrix_file, "non-finite value");
    entries(i - 1, j - 1) = v;
    entries(j - 1, i - 1) = v;
    if (j - i > 1) banded = false;
  }

  std::ifstream rhs_in(rhs_file);
  if (!rhs_in) bad_input(rhs_file, "cannot open");
  // Values are whitespace separated and may span any number of lines.
  Vector rhs(n);
  long long filled = 0;
  while (next_data_line(rhs_in, line)) {
    std::istringstream row(line);
    std::string token;
    while (row >> token) {
      if (filled == n) bad_input(rhs_file, "more than " + std::to_string(n) + " values");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) bad_input(rhs_file, "malformed value '" + token + "'");
      rhs[filled++] = v;
    }
  }
  if (filled != n) bad_input(rhs_file, "expected " + std::to_string(n) + " values");

  if (banded) {
    Vector diag = entries.diagonal();
    Vector off(n - 1);
    for (long long i = 0; i + 1 < n; ++i) off[i] = entries(i, i + 1);
    return QuadraticObjective(SymmetricMatrix::tridiagonal(std::move(diag), std::move(off)), std::move(rhs));
  }
  return QuadraticObjective(SymmetricMatrix::dense(std::move(entries)), std::move(rhs));
}

}  // namespace subspace_descent
