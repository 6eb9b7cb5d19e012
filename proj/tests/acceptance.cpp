// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "subspace_descent/analysis.hpp"
#include "subspace_descent/experiment.hpp"

using namespace subspace_descent;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

ExperimentSpec nesterov_spec(Index n, Method m, SamplerKind s) {
  ExperimentSpec spec;
  spec.n = n;
  spec.method = m;
  spec.sampler = s;
  return spec;
}

const std::vector<Index> kLargeSizes = {63, 127, 255, 511, 1023, 2047, 4095};

/// Uniform RFASD runs are shared between the plateau and permutation criteria.
std::vector<TrialSummary>& uniform_rfasd() {
  static std::vector<TrialSummary> runs = [] {
    std::vector<TrialSummary> out;
    for (Index n : kLargeSizes) out.push_back(run_experiment(nesterov_spec(n, Method::rfasd, SamplerKind::uniform)));
    return out;
  }();
  return runs;
}

Outcome multilevel_counts() {
  const auto t0 = std::chrono::steady_clock::now();
  const Index expected[] = {11, 26, 57, 120, 247, 502, 1013, 2036, 4083, 8178};
  bool ok = true;
  std::string got;
  for (int level = 3; level <= 12; ++level) {
    const Index n = (Index{1} << level) - 1;
    const Decomposition d = multilevel_nodal_decomposition(level, SpdOperator(SymmetricMatrix::laplacian_1d(n)));
    const auto j = static_cast<Index>(d.size());
    ok = ok && j == expected[level - 3] && multilevel_subspace_count(level) == j;
    got += (got.empty() ? "" : ",") + std::to_string(j);
  }
  const double t = seconds_since(t0);
  return {ok && t < 1.0, "J = " + got + " in " + fmt(t, 3) + " s"};
}

Outcome cyclic_cd_counts() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::pair<Index, double> table[] = {{7, 819}, {15, 6465}, {31, 48576}, {63, 355190}};
  bool ok = true;
  std::string got;
  for (const auto& [n, target] : table) {
    ExperimentSpec spec = nesterov_spec(n, Method::rcd, SamplerKind::cyclic);
    spec.trials = 1;
    const TrialSummary s = run_experiment(spec);
    ok = ok && s.converged_fraction == 1.0 && std::abs(s.mean_iterations - target) <= 0.005 * target;
    got += (got.empty() ? "" : ", ") + std::to_string(n) + ":" + fmt(s.mean_iterations, 8);
  }
  const double t = seconds_since(t0);
  return {ok && t < 30.0, got + " in " + fmt(t, 3) + " s"};
}

Outcome closed_form_minimum() {
  struct Case { Index n, r; double l; };
  double worst = 0.0;
  for (const Case c : {Case{7, 7, 2.0}, Case{15, 15, 2.0}, Case{31, 31, 4.0}}) {
    const NesterovWorst f(c.n, c.r, c.l);
    const double solved = f.value(quadratic_minimizer(*f.as_quadratic()));
    const double formula = c.l / 16.0 * (-1.0 + 1.0 / static_cast<double>(c.r + 1));
    worst = std::max(worst, std::abs(solved - formula));
  }
  return {worst <= 1e-10, "max |f(x*) - formula| = " + fmt(worst, 3)};
}

Outcome pgd_one_step() {
  bool ok = true;
  std::string got;
  std::mt19937_64 rng(2024);
  for (Index n : {7, 63}) {
    for (std::uint64_t seed : {1u, 42u, 777u}) {
      ExperimentSpec spec = nesterov_spec(n, Method::pgd, SamplerKind::uniform);
      spec.trials = 1;
      spec.seed = seed;
      spec.initial_point = random_vector(n, rng);
      const TrialSummary s = run_experiment(spec);
      ok = ok && s.converged_fraction == 1.0 && s.iterations[0] == 1;
      got += " " + std::to_string(s.iterations[0]);
    }
  }
  return {ok, "iterations:" + got};
}

Outcome uniform_plateau() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& runs = uniform_rfasd();
  double mean = 0.0;
  for (const auto& s : runs) mean += s.mean_epochs;
  mean /= static_cast<double>(runs.size());
  bool ok = true;
  std::string got;
  for (const auto& s : runs) {
    ok = ok && s.converged_fraction == 1.0 && s.mean_epochs >= 12.0 && s.mean_epochs <= 20.0 &&
         std::abs(s.mean_epochs - mean) <= 0.15 * mean;
    got += " " + fmt(s.mean_epochs, 4);
  }
  const double t = seconds_since(t0);
  const double largest = runs.back().seconds;
  return {ok && largest < 120.0,
          "epochs" + got + " (plateau " + fmt(mean, 4) + ", N=4095 in " + fmt(largest, 3) + " s, total " + fmt(t, 3) + " s)"};
}

Outcome permutation_band() {
  const auto& uniform = uniform_rfasd();
  bool ok = true;
  std::string got;
  for (std::size_t i = 0; i < kLargeSizes.size(); ++i) {
    const TrialSummary s = run_experiment(nesterov_spec(kLargeSizes[i], Method::rfasd, SamplerKind::permutation));
    ok = ok && s.converged_fraction == 1.0 && s.mean_epochs >= 6.5 && s.mean_epochs <= 10.5 &&
         s.mean_epochs < uniform[i].mean_epochs;
    got += " " + fmt(s.mean_epochs, 4);
  }
  return {ok, "epochs" + got};
}

Outcome cyclic_fasd_band() {
  bool ok = true;
  std::string got;
  for (Index n : kLargeSizes) {
    ExperimentSpec spec = nesterov_spec(n, Method::rfasd, SamplerKind::cyclic);
    spec.trials = 1;
    const TrialSummary s = run_experiment(spec);
    ok = ok && s.converged_fraction == 1.0 && s.mean_epochs >= 8.0 && s.mean_epochs <= 11.0;
    got += " " + fmt(s.mean_epochs, 4);
  }
  return {ok, "epochs" + got};
}

Outcome rcd_growth() {
  std::vector<double> epochs;
  for (Index n : {15, 31, 63}) {
    const TrialSummary s = run_experiment(nesterov_spec(n, Method::rcd, SamplerKind::uniform));
    if (s.converged_fraction < 1.0) return {false, "N=" + std::to_string(n) + " did not converge"};
    epochs.push_back(s.mean_epochs);
  }
  const double r1 = epochs[1] / epochs[0];
  const double r2 = epochs[2] / epochs[1];
  const bool ok = r1 >= 3.0 && r1 <= 4.5 && r2 >= 3.0 && r2 <= 4.5;
  return {ok, "epochs " + fmt(epochs[0]) + " " + fmt(epochs[1]) + " " + fmt(epochs[2]) + ", ratios " + fmt(r1, 4) +
                  " " + fmt(r2, 4)};
}

Outcome gradient_identities() {
  std::mt19937_64 rng(9);
  double worst_identity = 0.0;
  double worst_ratio = 0.0;
  bool ok = true;
  for (Index n : {3, 7, 15}) {
    int level = 0;
    while ((Index{1} << level) - 1 < n) ++level;
    const SpdOperator lap(SymmetricMatrix::laplacian_1d(n));
    const SpdOperator id = SpdOperator::identity(n);
    std::vector<std::vector<Index>> pairs;
    for (Index i = 0; i < n; i += 2) pairs.push_back(i + 1 < n ? std::vector<Index>{i, i + 1} : std::vector<Index>{i});
    const std::vector<Decomposition> ds = {coordinate_decomposition(n, id),        coordinate_decomposition(n, lap),
                                           block_decomposition(pairs, id),          block_decomposition(pairs, lap),
                                           multilevel_nodal_decomposition(level, lap), multilevel_nodal_decomposition(level, id)};
    for (const Decomposition& d : ds) {
      const double c = stability_constant(d);
      for (int t = 0; t < 200; ++t) {
        const IdentityReport r = decomposition_identity_check(random_vector(n, rng), d, c);
        ok = ok && r.passed();
        worst_identity = std::max(worst_identity, r.identity_error);
        worst_ratio = std::max(worst_ratio, r.global_dual / (c * r.metric_sum));
      }
    }
  }
  return {ok, "max relative identity error " + fmt(worst_identity, 3) + ", max ||g||^2/(C sum) " + fmt(worst_ratio, 8)};
}

Outcome sufficient_decay() {
  std::mt19937_64 rng(10);
  bool ok = true;
  double min_slack = std::numeric_limits<double>::infinity();
  for (Index n : {7, 15}) {
    const ExperimentSpec spec = nesterov_spec(n, Method::rfasd, SamplerKind::proportional);
    const ProblemSetup setup = build_problem(spec);
    const Decomposition& d = *setup.decomposition;
    const double c = stability_constant(d);
    const auto p = sampling_probabilities(SamplerKind::proportional, d.local_lipschitz());
    for (int t = 0; t < 100; ++t) {
      const DecayReport r = expected_decay_check(random_vector(n, rng), *setup.objective, d, p, c);
      ok = ok && r.pass;
      min_slack = std::min(min_slack, r.slack);
    }
  }
  return {ok, "min slack " + fmt(min_slack, 4)};
}

Outcome linear_rate() {
  ExperimentSpec spec = nesterov_spec(7, Method::rfasd, SamplerKind::uniform);
  spec.keep_traces = true;
  const ProblemSetup setup = build_problem(spec);
  const double c = stability_constant(*setup.decomposition);
  const double bound = linear_rate_bound(1.0, 1.0, c, 11).value;
  const TrialSummary s = run_experiment(spec);
  const RateFit fit = empirical_rate_fit(s.traces, *setup.objective->known_minimum());
  return {fit.rate <= bound + 0.02,
          "fitted " + fmt(fit.rate, 5) + " vs bound " + fmt(bound, 5) + " + 0.02 (C_A = " + fmt(c, 6) + ")"};
}

Outcome rfas_equivalence() {
  const NesterovWorst f(15, 15, 2.0);
  ExperimentSpec spec = nesterov_spec(15, Method::rfasd, SamplerKind::uniform);
  const ProblemSetup setup = build_problem(spec);
  SolverConfig c;
  c.method = Method::rfasd;
  c.seed = 123;
  c.tolerance = 1e-300;
  c.max_iterations = 1000;
  const RunTrace a = run_solver(c, f, *setup.decomposition);
  c.method = Method::rfas;
  const RunTrace b = run_solver(c, f, *setup.decomposition);
  bool same = a.iteration_count == 1000 && b.iteration_count == 1000 && a.records.size() == b.records.size() &&
              a.final_point == b.final_point;
  for (std::size_t k = 0; same && k < a.records.size(); ++k)
    same = a.records[k].subspace == b.records[k].subspace && a.records[k].value == b.records[k].value &&
           a.records[k].gradient_norm == b.records[k].gradient_norm;
  return {same, same ? "1000 iterations bit-identical" : "iterates differ"};
}

Outcome gradient_consistency() {
  // Points in the unit box keep |f| = O(1); the rounding floor of the quotient is ulp(f) / eps.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  const auto point = [&](Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = box(rng);
    return v;
  };
  double worst = 0.0;
  double largest_value = 0.0;
  const auto probe = [&](const Objective& f, Index n) {
    for (int t = 0; t < 20; ++t) {
      const Vector x = point(n);
      worst = std::max(worst, max_gradient_error(f, x));
      largest_value = std::max(largest_value, std::abs(f.value(x)));
    }
  };
  for (const auto& [n, r, l] : {std::tuple<Index, Index, double>{7, 7, 2.0}, {15, 15, 2.0}, {16, 9, 3.0}, {31, 31, 4.0}})
    probe(NesterovWorst(n, r, l), n);
  const Matrix m = Matrix::NullaryExpr(8, 8, [&]() { return box(rng); });
  Matrix h = m * m.transpose();
  h = 0.5 * (h + h.transpose());
  probe(QuadraticObjective(SymmetricMatrix::dense(h), point(8)), 8);
  return {worst <= 1e-9, "max central-difference error " + fmt(worst, 3) + " at eps 1e-5, max |f| " +
                             fmt(largest_value, 3) + " (all objectives are quadratic)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"multilevel subspace counts", multilevel_counts},
      {"cyclic CD iteration counts", cyclic_cd_counts},
      {"closed-form minimum value", closed_form_minimum},
      {"PGD with A = H in one iteration", pgd_one_step},
      {"uniform RFASD epoch plateau", uniform_plateau},
      {"permuted RFASD epoch band", permutation_band},
      {"cyclic FASD epoch band", cyclic_fasd_band},
      {"uniform RCD epoch growth", rcd_growth},
      {"gradient identities and stable decomposition", gradient_identities},
      {"sufficient decay by enumeration", sufficient_decay},
      {"empirical linear rate", linear_rate},
      {"RFAS and RFASD bit-identical", rfas_equivalence},
      {"gradient consistency", gradient_consistency},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu  %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
