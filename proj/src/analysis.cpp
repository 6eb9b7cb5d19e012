#include "subspace_descent/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "subspace_descent/errors.hpp"

namespace subspace_descent {

MetricConstants quadratic_metric_constants(const SymmetricMatrix& hessian, const SpdOperator& metric) {
  require_same_dimension(metric.dimension(), hessian.dimension(), "quadratic_metric_constants");
  const EigenRange range = generalized_extreme_eigenvalues(hessian, metric);
  return {range.min, range.max};
}

RateBound linear_rate_bound(double mu, double mean_lipschitz, double stability, std::size_t j) {
  if (!(mu > 0.0) || !(mean_lipschitz > 0.0) || !(stability > 0.0) || j == 0)
    throw std::invalid_argument("linear_rate_bound: inputs must be positive");
  const double value = 1.0 - mu / (static_cast<double>(j) * stability * mean_lipschitz);
  if (value <= 0.0) return {0.0, true};
  return {value, false};
}

SublinearBound sublinear_bound(std::uint64_t k, double d0, double r0, std::size_t j, double mean_lipschitz,
                               double stability) {
  if (!(d0 >= 0.0)) throw std::invalid_argument("sublinear_bound: d0 must be nonnegative");
  if (!(r0 > 0.0)) throw std::invalid_argument("sublinear_bound: R0 must be positive");
  const double scale = 2.0 * r0 * r0 * static_cast<double>(j) * mean_lipschitz * stability;
  const double kk = static_cast<double>(k);
  SublinearBound b;
  b.tight = d0 / (1.0 + d0 * kk / scale);
  if (k >= 1) b.loose = scale / kk;
  return b;
}

namespace {

bool relatively_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double resolved_stability(const Decomposition& d, std::optional<double> stability) {
  if (stability) return *stability;
  if (auto c = d.stability_constant()) return *c;
  return stability_constant(d);
}

}  // namespace

IdentityReport decomposition_identity_check(const Vector& g, const Decomposition& d,
                                            std::optional<double> stability) {
  require_same_dimension(d.dimension(), g.size(), "decomposition_identity_check");
  if (!all_finite(g)) throw std::invalid_argument("decomposition_identity_check: g must be finite");

  IdentityReport r;
  r.stability = resolved_stability(d, stability);
  Vector total = Vector::Zero(g.size());
  for (const Subspace& s : d.subspaces()) {
    const Vector gi = s.restrict_vector(g);
    const Vector si = s.local_matrix().solve(-gi);
    r.dual_sum += -gi.dot(si);
    r.metric_sum += s.local_matrix().apply(si).dot(si);
    s.prolong(si).axpy_into(1.0, total);
  }
  r.inner = -g.dot(total);
  r.global_dual = g.dot(d.preconditioner().solve(g));

  const double scale = std::max({std::abs(r.inner), std::abs(r.dual_sum), std::abs(r.metric_sum)});
  if (scale > 0.0) {
    r.identity_error = std::max({std::abs(r.inner - r.dual_sum), std::abs(r.dual_sum - r.metric_sum),
                                 std::abs(r.inner - r.metric_sum)}) /
                       scale;
  }
  r.identity_pass = relatively_equal(r.inner, r.dual_sum, kIdentityTolerance) &&
                    relatively_equal(r.dual_sum, r.metric_sum, kIdentityTolerance);
  const double rhs = r.stability * r.metric_sum;
  r.stability_slack = rhs - r.global_dual;
  r.stability_pass = r.global_dual <= rhs + kIdentityTolerance * std::max(rhs, r.global_dual);
  return r;
}

DecayReport expected_decay_check(const Vector& x, const Objective& f, const Decomposition& d,
                                 std::span<const double> probabilities, std::optional<double> stability) {
  require_same_dimension(d.dimension(), x.size(), "expected_decay_check");
  require_same_dimension(f.dimension(), x.size(), "expected_decay_check");
  const std::size_t j = d.size();
  if (j > kDecayEnumerationLimit)
    throw DenseLimitError("expected_decay_check: too many subspaces to enumerate");
  if (probabilities.size() != j) throw DimensionError("expected_decay_check: need one probability per subspace");

  const double c = resolved_stability(d, stability);
  const Vector g = f.gradient(x);

  DecayReport r;
  r.value = f.value(x);
  double min_ratio = std::numeric_limits<double>::infinity();
  double expected = 0.0;
  for (std::size_t i = 0; i < j; ++i) {
    const Subspace& s = d[i];
    const double p = probabilities[i];
    if (!(p >= 0.0)) throw std::invalid_argument("expected_decay_check: probabilities must be nonnegative");
    if (s.local_lipschitz() == 0.0) {
      expected += p * r.value;
      continue;
    }
    min_ratio = std::min(min_ratio, p / s.local_lipschitz());
    if (p == 0.0) continue;
    const Vector step = s.local_matrix().solve(-s.restrict_vector(g)) / s.local_lipschitz();
    Vector next = x;
    s.prolong(step).axpy_into(1.0, next);
    expected += p * f.value(next);
  }
  r.expected_value = expected;
  r.decrease = expected - r.value;

  const double jj = static_cast<double>(j);
  r.effective_lipschitz = 1.0 / (jj * min_ratio);
  r.conservative = !relatively_equal(r.effective_lipschitz, d.mean_lipschitz(), 1e-12);
  const double dual = g.dot(d.preconditioner().solve(g));
  r.bound = -dual / (2.0 * r.effective_lipschitz * c * jj);
  r.slack = r.bound + kDecayTolerance - r.decrease;
  r.pass = r.slack >= 0.0;
  return r;
}

RateFit empirical_rate_fit(std::span<const RunTrace> traces, double f_star) {
  if (traces.empty()) throw std::invalid_argument("empirical_rate_fit: need at least one trace");
  std::size_t length = traces.front().records.size();
  for (const RunTrace& t : traces) length = std::min(length, t.records.size());
  if (length < 2) throw std::invalid_argument("empirical_rate_fit: traces need at least two records");

  std::vector<double> gap(length, 0.0);
  for (const RunTrace& t : traces)
    for (std::size_t k = 0; k < length; ++k) gap[k] += t.records[k].value - f_star;
  for (double& v : gap) v /= static_cast<double>(traces.size());
  if (!(gap[0] > 0.0)) throw std::invalid_argument("empirical_rate_fit: initial gap must be positive");

  RateFit fit;
  std::size_t last = length - 1;
  for (std::size_t k = 1; k < length; ++k) {
    if (!(gap[k] > 0.0)) {
      fit.trimmed = true;
      if (k == 1) {
        fit.rate = 0.0;
        fit.iterations = 1;
        return fit;
      }
      last = k - 1;
      break;
    }
  }
  fit.iterations = last;
  fit.rate = std::pow(gap[last] / gap[0], 1.0 / static_cast<double>(last));
  return fit;
}

double r0_strongly_convex(double d0, double mu) {
  if (!(mu > 0.0))
    throw std::invalid_argument("r0_strongly_convex: mu_A must be positive; supply R0 explicitly for convex problems");
  if (!(d0 >= 0.0)) throw std::invalid_argument("r0_strongly_convex: d0 must be nonnegative");
  return std::sqrt(2.0 * d0 / mu);
}

bool TheoryReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

}  // namespace subspace_descent
