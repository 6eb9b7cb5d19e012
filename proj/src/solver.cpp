#include "subspace_descent/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace subspace_descent {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::gd: return "gd";
    case Method::pgd: return "pgd";
    case Method::rcd: return "rcd";
    case Method::rbcd: return "rbcd";
    case Method::rfasd: return "rfasd";
    case Method::rfas: return "rfas";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "gd") return Method::gd;
  if (name == "pgd") return Method::pgd;
  if (name == "rcd" || name == "cd") return Method::rcd;
  if (name == "rbcd") return Method::rbcd;
  if (name == "rfasd" || name == "fasd") return Method::rfasd;
  if (name == "rfas" || name == "fas") return Method::rfas;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Search directions

std::vector<FasLocalProblem> quadratic_fas_problems(const Decomposition& d) {
  std::vector<FasLocalProblem> problems;
  problems.reserve(d.size());
  for (const auto& s : d.subspaces()) {
    problems.push_back({std::make_shared<QuadraticLocalObjective>(s.local_matrix()),
                        std::make_shared<ZeroProjection>(s.size())});
  }
  return problems;
}

namespace {

double step_length(const StepRule& step, const Subspace& s) {
  if (step.kind == StepRule::Kind::fixed) return step.alpha;
  // A flat subspace carries no gradient for a bounded-below quadratic.
  return s.local_lipschitz() > 0.0 ? 1.0 / s.local_lipschitz() : 0.0;
}

/// Local coefficients of -A_i^{-1} R_i g.
Vector local_descent(const Vector& restricted_gradient, const Subspace& s) {
  return s.local_matrix().solve(-restricted_gradient);
}

constexpr int kLocalNewtonBudget = 100;
constexpr double kLocalResidualTolerance = 1e-10;

}  // namespace

Vector subspace_search_direction(const Vector& gradient, const Subspace& subspace) {
  const Vector c = local_descent(subspace.restrict_vector(gradient), subspace);
  return subspace.prolong(c).to_dense(gradient.size());
}

Vector rfasd_step(const Vector& x, const Subspace& subspace, const Objective& f, const StepRule& step) {
  require_same_dimension(f.dimension(), x.size(), "rfasd_step");
  return x + step_length(step, subspace) * subspace_search_direction(f.gradient(x), subspace);
}

Vector fas_local_direction(const Vector& restricted_gradient, const LocalObjective& local,
                           const Vector& projected_point) {
  require_same_dimension(local.dimension(), restricted_gradient.size(), "fas_local_direction");
  require_same_dimension(local.dimension(), projected_point.size(), "fas_local_direction");
  const Vector tau = local.gradient(projected_point) - restricted_gradient;

  if (const SpdOperator* metric = local.quadratic_metric()) return metric->solve(tau) - projected_point;

  // Damped Newton on phi(w) = f_i(w) - tau.w, started from Q_i x.
  Vector w = projected_point;
  auto phi = [&](const Vector& v) { return local.value(v) - tau.dot(v); };
  for (int it = 0; it < kLocalNewtonBudget; ++it) {
    const Vector residual = local.gradient(w) - tau;
    if (residual.norm() <= kLocalResidualTolerance) return w - projected_point;
    Eigen::LDLT<Matrix> ldlt(local.hessian(w));
    Vector dir;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) dir = -ldlt.solve(residual);
    if (dir.size() == 0 || !dir.allFinite() || dir.dot(residual) >= 0.0) dir = -residual;
    const double slope = dir.dot(residual);
    const double phi0 = phi(w);
    double t = 1.0;
    for (int halving = 0; halving < 60 && phi(w + t * dir) > phi0 + 1e-4 * t * slope; ++halving) t *= 0.5;
    w += t * dir;
  }
  throw ConvergenceError("fas_local_direction: local Newton solve did not converge");
}

Vector fas_search_direction(const Vector& x, const Subspace& subspace, const FasLocalProblem& local,
                            const Objective& f) {
  const Vector rg = subspace.restrict_vector(f.gradient(x));
  const Vector qx = local.projection ? local.projection->project(x) : Vector::Zero(subspace.size());
  return subspace.prolong(fas_local_direction(rg, *local.objective, qx)).to_dense(x.size());
}

// ---------------------------------------------------------------------------
// Baseline decompositions

Decomposition rcd_decomposition(const SymmetricMatrix& hessian) {
  const Index n = hessian.dimension();
  Decomposition d = coordinate_decomposition(n, SpdOperator::identity(n));
  std::vector<double> lipschitz(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) lipschitz[static_cast<std::size_t>(i)] = rcd_column_lipschitz(hessian, i);
  return d.with_local_lipschitz(lipschitz);
}

Decomposition rbcd_decomposition(const std::vector<std::vector<Index>>& partition, const SymmetricMatrix& hessian) {
  return assign_quadratic_lipschitz(block_decomposition(partition, SpdOperator::identity(hessian.dimension())),
                                    hessian);
}

// ---------------------------------------------------------------------------
// Driver

namespace {

constexpr int kDivergenceEpochs = 10;
constexpr double kDivergenceFactor = 1e3;

/// Iterate, gradient, squared gradient norm, and f for a quadratic, kept
/// current under sparse updates.
class QuadraticState {
 public:
  QuadraticState(const QuadraticObjective& q, Vector x0) : q_(&q), x_(std::move(x0)) { resync(); }

  void resync() {
    g_ = q_->gradient(x_);
    gsq_ = g_.squaredNorm();
    // f = 1/2 x.(Hx) - b.x = 1/2 x.(g - b)
    value_ = 0.5 * x_.dot(g_ - q_->rhs());
  }

  void apply(const SparseVector& d) {
    const SymmetricMatrix& h = q_->hessian_matrix();
    value_ += d.dot(g_) + 0.5 * h.bilinear(d, d);
    const std::vector<Index> rows = h.image_support(d);
    for (Index r : rows) gsq_ -= g_[r] * g_[r];
    h.apply_sparse_add(d, 1.0, g_);
    for (Index r : rows) gsq_ += g_[r] * g_[r];
    if (gsq_ < 0.0) gsq_ = 0.0;
    d.axpy_into(1.0, x_);
  }

  const Vector& x() const { return x_; }
  const Vector& gradient() const { return g_; }
  double gradient_norm() const { return std::sqrt(gsq_); }
  double value() const { return value_; }

 private:
  const QuadraticObjective* q_;
  Vector x_;
  Vector g_;
  double gsq_ = 0.0;
  double value_ = 0.0;
};

/// Full-gradient state for general objectives.
class GeneralState {
 public:
  GeneralState(const Objective& f, Vector x0) : f_(&f), x_(std::move(x0)) { resync(); }

  void resync() {
    g_ = f_->gradient(x_);
    value_ = f_->value(x_);
  }
  void apply(const SparseVector& d) {
    d.axpy_into(1.0, x_);
    resync();
  }
  void apply_dense(const Vector& d) {
    x_ += d;
    resync();
  }

  const Vector& x() const { return x_; }
  const Vector& gradient() const { return g_; }
  double gradient_norm() const { return g_.norm(); }
  double value() const { return value_; }

 private:
  const Objective* f_;
  Vector x_;
  Vector g_;
  double value_ = 0.0;
};

class DivergenceGuard {
 public:
  explicit DivergenceGuard(double initial_value) : initial_(initial_value), last_(initial_value) {}

  void observe(double value, std::uint64_t k) {
    if (!std::isfinite(value)) fail(value, k);
    rising_ = value > last_ ? rising_ + 1 : 0;
    last_ = value;
    if (rising_ >= kDivergenceEpochs && value - initial_ > kDivergenceFactor * std::max(1.0, std::abs(initial_)))
      fail(value, k);
  }

 private:
  [[noreturn]] void fail(double value, std::uint64_t k) const {
    std::ostringstream msg;
    msg << "solver diverged at iteration " << k << ": f = " << value << " (f(x0) = " << initial_
        << "); check the Lipschitz constants or step size";
    throw DivergenceError(msg.str());
  }

  double initial_;
  double last_;
  int rising_ = 0;
};

std::optional<double> minimum_value(const Objective& f) {
  if (auto m = f.known_minimum()) return m;
  if (const QuadraticObjective* q = f.as_quadratic(); q && q->strongly_convex())
    return q->value(quadratic_minimizer(*q));
  return std::nullopt;
}

void validate(const SolverConfig& config, const Objective& f, const Decomposition& d) {
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("solver: tolerance must be positive");
  if (config.max_iterations < 1) throw std::invalid_argument("solver: max_iterations must be >= 1");
  require_same_dimension(f.dimension(), d.dimension(), "solver: objective vs decomposition");
  if (config.initial_point) require_same_dimension(f.dimension(), config.initial_point->size(), "solver: x0");
  if (const QuadraticObjective* q = f.as_quadratic(); q && !q->strongly_convex() && !config.allow_semidefinite)
    throw std::invalid_argument(
        "solver: objective is not strongly convex (semidefinite Hessian); enable allow_semidefinite to proceed");
  if (config.step.kind == StepRule::Kind::fixed && !(config.step.alpha > 0.0))
    throw std::invalid_argument("solver: fixed step must be positive");
  if (config.method == Method::rcd)
    for (const auto& s : d.subspaces())
      if (s.size() != 1) throw std::invalid_argument("solver: RCD needs one-dimensional subspaces");
  if (config.method == Method::rfas && !config.fas_problems.empty() && config.fas_problems.size() != d.size())
    throw std::invalid_argument("solver: need one FAS local problem per subspace");
}

template <class State>
class Recorder {
 public:
  Recorder(RunTrace& trace, bool every_iteration, std::optional<double> f_star)
      : trace_(&trace), every_(every_iteration), f_star_(f_star) {}

  void record(std::uint64_t k, std::int64_t subspace, const State& s, bool force = false) {
    if (!every_ && !force && k != 0) return;
    IterationRecord r;
    r.k = k;
    r.subspace = subspace;
    r.value = s.value();
    r.gradient_norm = s.gradient_norm();
    if (f_star_) r.gap = r.value - *f_star_;
    trace_->records.push_back(r);
  }

 private:
  RunTrace* trace_;
  bool every_;
  std::optional<double> f_star_;
};

template <class State>
void finish(RunTrace& trace, Recorder<State>& recorder, const State& state, std::uint64_t k, bool converged,
            bool every_iteration) {
  trace.converged = converged;
  trace.iteration_count = k;
  trace.final_gradient_norm = state.gradient_norm();
  trace.final_value = state.value();
  trace.final_point = state.x();
  // The loop records x^k before testing; without per-iteration records, add the last one.
  if (!every_iteration && k != 0) recorder.record(k, -1, state, true);
  if (!trace.records.empty()) trace.records.back().subspace = -1;
}

template <class State>
RunTrace run_subspace_loop(const SolverConfig& config, const Objective& f, const Decomposition& d, State state) {
  RunTrace trace;
  trace.subspace_count = d.size();
  const std::optional<double> f_star = minimum_value(f);
  Recorder<State> recorder(trace, config.record_iterations, f_star);

  const std::vector<double> lipschitz = d.local_lipschitz();
  Sampler sampler(config.sampler, lipschitz, config.seed);
  const std::vector<FasLocalProblem> fas =
      config.method == Method::rfas && config.fas_problems.empty() ? quadratic_fas_problems(d) : config.fas_problems;

  trace.initial_gradient_norm = state.gradient_norm();
  const double threshold = config.tolerance * trace.initial_gradient_norm;
  DivergenceGuard guard(state.value());
  const std::uint64_t epoch = d.size();

  std::uint64_t k = 0;
  for (;;) {
    bool converged = state.gradient_norm() <= threshold;
    if (converged) {
      state.resync();
      converged = state.gradient_norm() <= threshold;
    }
    if (converged || k >= config.max_iterations) {
      if (config.record_iterations) recorder.record(k, -1, state);
      finish(trace, recorder, state, k, converged, config.record_iterations);
      return trace;
    }

    const std::size_t i = sampler.next();
    recorder.record(k, static_cast<std::int64_t>(i), state);
    const Subspace& sub = d[i];
    const Vector rg = sub.restrict_vector(state.gradient());
    Vector local;
    if (config.method == Method::rfas) {
      const FasLocalProblem& p = fas[i];
      const Vector qx = p.projection ? p.projection->project(state.x()) : Vector::Zero(sub.size());
      local = fas_local_direction(rg, *p.objective, qx);
    } else {
      local = local_descent(rg, sub);
    }
    state.apply(sub.prolong(step_length(config.step, sub) * local));
    ++k;

    if (k % epoch == 0) {
      state.resync();
      guard.observe(state.value(), k);
    }
  }
}

RunTrace run_full_space(const SolverConfig& config, const Objective& f, const Decomposition& d, Vector x0) {
  const QuadraticObjective* q = f.as_quadratic();
  double step = config.step.alpha;
  if (config.step.kind == StepRule::Kind::inverse_local_lipschitz) {
    if (!q) throw std::invalid_argument("solver: GD/PGD on a non-quadratic objective needs a fixed step");
    const EigenRange range = config.method == Method::gd
                                 ? extreme_eigenvalues(q->hessian_matrix())
                                 : generalized_extreme_eigenvalues(q->hessian_matrix(), d.preconditioner());
    step = 1.0 / range.max;
  }

  RunTrace trace;
  trace.subspace_count = 1;
  GeneralState state(f, std::move(x0));
  Recorder<GeneralState> recorder(trace, config.record_iterations, minimum_value(f));
  trace.initial_gradient_norm = state.gradient_norm();
  const double threshold = config.tolerance * trace.initial_gradient_norm;
  DivergenceGuard guard(state.value());

  std::uint64_t k = 0;
  for (;;) {
    const bool converged = state.gradient_norm() <= threshold;
    if (converged || k >= config.max_iterations) {
      if (config.record_iterations) recorder.record(k, -1, state);
      finish(trace, recorder, state, k, converged, config.record_iterations);
      return trace;
    }
    recorder.record(k, 0, state);
    Vector direction = config.method == Method::gd ? Vector(state.gradient())
                                                   : d.preconditioner().solve(state.gradient());
    state.apply_dense(-step * direction);
    ++k;
    guard.observe(state.value(), k);
  }
}

}  // namespace

RunTrace run_solver(const SolverConfig& config, const Objective& f, const Decomposition& d) {
  validate(config, f, d);
  Vector x0 = config.initial_point ? *config.initial_point : Vector::Ones(f.dimension());

  if (config.method == Method::gd || config.method == Method::pgd) return run_full_space(config, f, d, std::move(x0));
  if (const QuadraticObjective* q = f.as_quadratic())
    return run_subspace_loop(config, f, d, QuadraticState(*q, std::move(x0)));
  return run_subspace_loop(config, f, d, GeneralState(f, std::move(x0)));
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  out << "k,i_k,f,gnorm,gap\n";
  char buf[256];
  for (const IterationRecord& r : trace.records) {
    const long long index = r.subspace < 0 ? 0 : static_cast<long long>(r.subspace) + 1;
    int len = std::snprintf(buf, sizeof(buf), "%llu,%lld,%.17g,%.17g,", static_cast<unsigned long long>(r.k),
                            index, r.value, r.gradient_norm);
    out.write(buf, len);
    if (r.gap) {
      len = std::snprintf(buf, sizeof(buf), "%.17g", *r.gap);
      out.write(buf, len);
    }
    out << '\n';
  }
}

}  // namespace subspace_descent
