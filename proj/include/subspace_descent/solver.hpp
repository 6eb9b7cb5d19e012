#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "subspace_descent/decomposition.hpp"
#include "subspace_descent/objective.hpp"
#include "subspace_descent/sampling.hpp"

namespace subspace_descent {

enum class Method { gd, pgd, rcd, rbcd, rfasd, rfas };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct StepRule {
  enum class Kind { inverse_local_lipschitz, fixed };
  Kind kind = Kind::inverse_local_lipschitz;
  double alpha = 1.0;

  static StepRule inverse_local_lipschitz() { return {}; }
  static StepRule fixed(double alpha) { return {Kind::fixed, alpha}; }
};

/// Local objective f_i on V_i for the FAS search direction.
class LocalObjective {
 public:
  virtual ~LocalObjective() = default;
  virtual Index dimension() const = 0;
  virtual double value(const Vector& w) const = 0;
  virtual Vector gradient(const Vector& w) const = 0;
  virtual Matrix hessian(const Vector& w) const = 0;
  /// Non-null when f_i(w) = 1/2 ||w||^2_{A_i}, which admits an exact local solve.
  virtual const SpdOperator* quadratic_metric() const { return nullptr; }
};

/// f_i(w) = 1/2 ||w||^2_{A_i}
class QuadraticLocalObjective final : public LocalObjective {
 public:
  explicit QuadraticLocalObjective(SpdOperator metric) : metric_(std::move(metric)) {}

  Index dimension() const override { return metric_.dimension(); }
  double value(const Vector& w) const override { return 0.5 * metric_.apply(w).dot(w); }
  Vector gradient(const Vector& w) const override { return metric_.apply(w); }
  Matrix hessian(const Vector&) const override { return metric_.matrix().to_dense(); }
  const SpdOperator* quadratic_metric() const override { return &metric_; }

 private:
  SpdOperator metric_;
};

/// Projection Q_i : V -> V_i in local coordinates.
class LocalProjection {
 public:
  virtual ~LocalProjection() = default;
  virtual Vector project(const Vector& x) const = 0;
};

/// Q_i x = 0.
class ZeroProjection final : public LocalProjection {
 public:
  explicit ZeroProjection(Index local_dimension) : n_(local_dimension) {}
  Vector project(const Vector&) const override { return Vector::Zero(n_); }

 private:
  Index n_;
};

/// Q_i x = R_i x, sampling x against the prolongation columns.
class RestrictionProjection final : public LocalProjection {
 public:
  explicit RestrictionProjection(const Subspace& subspace) : subspace_(&subspace) {}
  Vector project(const Vector& x) const override { return subspace_->restrict_vector(x); }

 private:
  const Subspace* subspace_;
};

struct FasLocalProblem {
  std::shared_ptr<const LocalObjective> objective;
  std::shared_ptr<const LocalProjection> projection;
};

/// Default RFAS local problems: f_i = 1/2 ||.||^2_{A_i} and Q_i = 0.
std::vector<FasLocalProblem> quadratic_fas_problems(const Decomposition& d);

struct SolverConfig {
  Method method = Method::rfasd;
  SamplerKind sampler = SamplerKind::uniform;
  StepRule step = StepRule::inverse_local_lipschitz();
  double tolerance = 1e-6;
  std::uint64_t max_iterations = 2'000'000;
  std::uint64_t seed = 42;
  /// Keep one record per iteration; otherwise only the first and last.
  bool record_iterations = true;
  /// Accept a semidefinite Hessian (convex but not strongly convex).
  bool allow_semidefinite = false;
  std::optional<Vector> initial_point;
  /// RFAS only; empty means quadratic_fas_problems(d).
  std::vector<FasLocalProblem> fas_problems;
};

struct IterationRecord {
  std::uint64_t k = 0;
  /// 0-based subspace chosen at step k; -1 when no update follows (final record)
  /// or for full-space methods.
  std::int64_t subspace = -1;
  double value = 0.0;
  double gradient_norm = 0.0;
  std::optional<double> gap;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  bool converged = false;
  std::uint64_t iteration_count = 0;
  std::size_t subspace_count = 1;
  double initial_gradient_norm = 0.0;
  double final_gradient_norm = 0.0;
  double final_value = 0.0;
  Vector final_point;

  double epoch_count() const {
    return static_cast<double>(iteration_count) / static_cast<double>(subspace_count);
  }
};

/// -I_i A_i^{-1} R_i g as a full-space vector.
Vector subspace_search_direction(const Vector& gradient, const Subspace& subspace);

/// x + alpha * subspace_search_direction(grad f(x)), alpha = 1/L_{A,i} or the fixed override.
Vector rfasd_step(const Vector& x, const Subspace& subspace, const Objective& f, const StepRule& step);

/// Local FAS correction eta - Q x, where eta solves grad f_i(eta) = tau and
/// tau = grad f_i(Q x) - R g.
Vector fas_local_direction(const Vector& restricted_gradient, const LocalObjective& local,
                           const Vector& projected_point);

/// I_i (eta_i - Q_i x) for the subspace, given the full objective.
Vector fas_search_direction(const Vector& x, const Subspace& subspace, const FasLocalProblem& local,
                            const Objective& f);

/// Coordinate decomposition in the l2 metric with L_i = ||a_i|| (column norms of H).
Decomposition rcd_decomposition(const SymmetricMatrix& hessian);
/// Block decomposition in the l2 metric with L_i = lambda_max of each diagonal block of H.
Decomposition rbcd_decomposition(const std::vector<std::vector<Index>>& partition, const SymmetricMatrix& hessian);

/// Runs the configured method. Stops when ||grad f(x^k)|| <= tol ||grad f(x^0)||
/// (tested before each update) or after max_iterations updates.
RunTrace run_solver(const SolverConfig& config, const Objective& f, const Decomposition& d);

/// "k,i_k,f,gnorm,gap" with 1-based i_k and 0 for "no update".
void write_trace_csv(const RunTrace& trace, std::ostream& out);

}  // namespace subspace_descent
