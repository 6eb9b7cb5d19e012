#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subspace_descent/decomposition.hpp"
#include "subspace_descent/objective.hpp"
#include "subspace_descent/solver.hpp"

namespace subspace_descent {

struct MetricConstants {
  double mu = 0.0;
  double lipschitz = 0.0;
};

/// Extreme eigenvalues of the pencil (H, A): the tightest strong-convexity and
/// Lipschitz constants of the quadratic measured in the A-metric.
MetricConstants quadratic_metric_constants(const SymmetricMatrix& hessian, const SpdOperator& metric);

struct RateBound {
  double value = 1.0;
  /// True when 1 - mu/(J C L) <= 0 and the value was clamped to 0.
  bool clamped = false;
};

/// 1 - mu_A / (J C_A mean_L_A)
RateBound linear_rate_bound(double mu, double mean_lipschitz, double stability, std::size_t j);

struct SublinearBound {
  /// d0 / (1 + d0 c k), c = 1 / (2 R0^2 J mean_L C)
  double tight = 0.0;
  /// 2 R0^2 J mean_L C / k; empty for k = 0.
  std::optional<double> loose;
};

SublinearBound sublinear_bound(std::uint64_t k, double d0, double r0, std::size_t j, double mean_lipschitz,
                               double stability);

struct IdentityReport {
  double inner = 0.0;        // -<g, sum s_i>
  double dual_sum = 0.0;     // sum ||R_i g||^2_{A_i^{-1}}
  double metric_sum = 0.0;   // sum ||s_i||^2_{A_i}
  double global_dual = 0.0;  // ||g||^2_{A^{-1}}
  double stability = 1.0;
  double identity_error = 0.0;  // largest relative mismatch in the equality chain
  double stability_slack = 0.0; // C sum ||s_i||^2 - ||g||^2_{A^{-1}}
  bool identity_pass = true;
  bool stability_pass = true;

  bool passed() const { return identity_pass && stability_pass; }
};

inline constexpr double kIdentityTolerance = 1e-10;

/// Evaluates s_i = -A_i^{-1} R_i g for every subspace and checks
///   -<g, sum s_i> = sum ||R_i g||^2_{A_i^{-1}} = sum ||s_i||^2_{A_i}
///   ||g||^2_{A^{-1}} <= C_A sum ||s_i||^2_{A_i}.
/// The stored stability constant is used when present, otherwise it is computed.
IdentityReport decomposition_identity_check(const Vector& g, const Decomposition& d,
                                            std::optional<double> stability = std::nullopt);

struct DecayReport {
  double value = 0.0;          // f(x)
  double expected_value = 0.0; // E[f(x^{k+1}) | x]
  double decrease = 0.0;       // expected_value - value
  double bound = 0.0;          // -||grad f||^2_{A^{-1}} / (2 L_eff C J)
  double effective_lipschitz = 0.0;
  double slack = 0.0;          // bound + tol - decrease
  /// L_eff differs from the mean Lipschitz constant (e.g. uniform sampling
  /// with unequal L_{A,i}).
  bool conservative = false;
  bool pass = true;
};

inline constexpr double kDecayTolerance = 1e-10;
inline constexpr std::size_t kDecayEnumerationLimit = 10000;

/// Exact conditional expectation of one step, by enumerating all J outcomes
/// with steps 1/L_{A,i}. L_eff = 1 / (J min_i p_i / L_{A,i}), which is the mean
/// Lipschitz constant for proportional sampling and the largest one for
/// uniform sampling.
DecayReport expected_decay_check(const Vector& x, const Objective& f, const Decomposition& d,
                                 std::span<const double> probabilities,
                                 std::optional<double> stability = std::nullopt);

struct RateFit {
  double rate = 0.0;
  std::size_t iterations = 0;
  /// Nonpositive averaged gaps were dropped from the tail.
  bool trimmed = false;
};

/// Per-iteration geometric contraction of the averaged gap E[f(x^k)] - f*
/// over the common prefix of the traces.
RateFit empirical_rate_fit(std::span<const RunTrace> traces, double f_star);

/// sqrt(2 d0 / mu_A)
double r0_strongly_convex(double d0, double mu);

struct CheckResult {
  std::string name;
  bool pass = true;
  double slack = 0.0;
};

struct TheoryReport {
  double mu_A = 0.0;
  double L_A = 0.0;
  double mean_L_A = 0.0;
  double C_A = 1.0;
  double rate_bound = 1.0;
  bool rate_clamped = false;
  std::vector<CheckResult> checks;

  bool passed() const;
};

}  // namespace subspace_descent
