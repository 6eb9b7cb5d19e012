#include "subspace_descent/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "subspace_descent/errors.hpp"
#include "subspace_descent/sampling.hpp"

namespace subspace_descent {

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

int level_for_size(Index n) {
  for (int level = 1; level < 31; ++level)
    if ((Index{1} << level) - 1 == n) return level;
  throw DimensionError("multilevel decomposition needs N = 2^level - 1, got N = " + std::to_string(n));
}

namespace {

/// V itself as one subspace with local matrix A.
Decomposition full_space_decomposition(const SpdOperator& metric) {
  const Index n = metric.dimension();
  std::vector<SparseVector> basis;
  basis.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) basis.push_back(SparseVector{{i}, {1.0}});
  std::vector<Subspace> subs;
  subs.emplace_back(std::move(basis), metric, 1.0, 0);
  return Decomposition(std::move(subs), metric);
}

std::vector<std::vector<Index>> contiguous_blocks(Index n, Index width) {
  if (width < 1) throw std::invalid_argument("block size must be >= 1");
  std::vector<std::vector<Index>> blocks;
  for (Index start = 0; start < n; start += width) {
    std::vector<Index> b;
    for (Index i = start; i < std::min(n, start + width); ++i) b.push_back(i);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

Decomposition scaled_lipschitz(const Decomposition& d, double scale) {
  if (scale == 1.0) return d;
  if (!(scale > 0.0)) throw std::invalid_argument("lipschitz scale must be positive");
  std::vector<double> l = d.local_lipschitz();
  for (double& v : l) v *= scale;
  return d.with_local_lipschitz(l);
}

}  // namespace

ProblemSetup build_problem(const ExperimentSpec& spec) {
  ProblemSetup setup;
  if (spec.problem == ProblemKind::nesterov) {
    const Index r = spec.r == 0 ? spec.n : spec.r;
    auto f = std::make_unique<NesterovWorst>(spec.n, r, spec.lipschitz);
    setup.semidefinite = !f->strongly_convex();
    setup.quadratic = f->as_quadratic();
    setup.objective = std::move(f);
  } else {
    auto q = std::make_unique<QuadraticObjective>(load_quadratic(spec.matrix_file, spec.rhs_file));
    setup.semidefinite = !q->strongly_convex();
    setup.quadratic = q.get();
    setup.objective = std::move(q);
  }
  const SymmetricMatrix& h = setup.quadratic->hessian_matrix();
  const Index n = h.dimension();

  auto hessian_metric = [&]() -> SpdOperator {
    if (setup.semidefinite)
      throw NotSpdError("the metric A = H needs a positive definite Hessian; this problem is only semidefinite");
    return setup.quadratic->hessian();
  };

  switch (spec.method) {
    case Method::gd: setup.decomposition = full_space_decomposition(SpdOperator::identity(n)); break;
    case Method::pgd: setup.decomposition = full_space_decomposition(hessian_metric()); break;
    case Method::rcd: setup.decomposition = rcd_decomposition(h); break;
    case Method::rbcd: setup.decomposition = rbcd_decomposition(contiguous_blocks(n, spec.block_size), h); break;
    case Method::rfasd:
    case Method::rfas: {
      const int level = level_for_size(n);
      if (spec.level != 0 && spec.level != level)
        throw DimensionError("level " + std::to_string(spec.level) + " does not match N = " + std::to_string(n));
      const SpdOperator metric = spec.problem == ProblemKind::nesterov
                                     ? SpdOperator(SymmetricMatrix::laplacian_1d(n, 1.0))
                                     : hessian_metric();
      setup.decomposition = assign_quadratic_lipschitz(multilevel_nodal_decomposition(level, metric), h);
      break;
    }
  }
  setup.decomposition = scaled_lipschitz(*setup.decomposition, spec.lipschitz_scale);
  return setup;
}

unsigned trial_thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SUBSPACE_DESCENT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

namespace {

SolverConfig trial_config(const ExperimentSpec& spec, const ProblemSetup& setup, std::size_t trial) {
  SolverConfig c;
  c.method = spec.method;
  c.sampler = spec.sampler;
  if (spec.fixed_step) c.step = StepRule::fixed(*spec.fixed_step);
  c.tolerance = spec.tolerance;
  c.max_iterations = spec.max_iterations;
  c.seed = spec.seed + trial;
  c.record_iterations = spec.keep_traces;
  c.allow_semidefinite = setup.semidefinite;
  c.initial_point = spec.initial_point;
  return c;
}

}  // namespace

TrialSummary run_experiment(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const ProblemSetup setup = build_problem(spec);
  const Decomposition& d = *setup.decomposition;

  std::vector<RunTrace> runs(spec.trials);
  std::vector<std::exception_ptr> errors(spec.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < spec.trials; t = next++) {
      try {
        runs[t] = run_solver(trial_config(spec, setup, t), *setup.objective, d);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(trial_thread_count(), static_cast<unsigned>(spec.trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  TrialSummary s;
  s.n = setup.objective->dimension();
  s.method = spec.method;
  s.sampler = spec.sampler;
  s.j = (spec.method == Method::gd || spec.method == Method::pgd) ? 1 : d.size();
  double total = 0.0;
  std::size_t ok = 0;
  for (RunTrace& run : runs) {
    s.iterations.push_back(run.iteration_count);
    s.epochs.push_back(static_cast<double>(run.iteration_count) / static_cast<double>(s.j));
    s.converged.push_back(run.converged);
    total += static_cast<double>(run.iteration_count);
    ok += run.converged ? 1 : 0;
    if (spec.keep_traces) s.traces.push_back(std::move(run));
  }
  const double trials = static_cast<double>(spec.trials);
  s.mean_iterations = total / trials;
  s.mean_epochs = s.mean_iterations / static_cast<double>(s.j);
  s.converged_fraction = static_cast<double>(ok) / trials;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

// ---------------------------------------------------------------------------
// Tables

TableResult reproduce_tables(int which, const std::vector<Index>& sizes, const ExperimentSpec& base) {
  if (which != 2 && which != 3) throw std::invalid_argument("table must be 2 or 3");
  TableResult table;
  table.which = which;
  const Method method = which == 2 ? Method::rcd : Method::rfasd;
  const SamplerKind kinds[] = {SamplerKind::uniform, SamplerKind::permutation, SamplerKind::cyclic};
  table.column_names = which == 2 ? std::vector<std::string>{"RCD", "RCD_perm", "cyclic CD"}
                                  : std::vector<std::string>{"RFASD", "RFASD_perm", "cyclic FASD"};
  for (Index n : sizes) {
    if (which == 2 && n > kCoordinateTableSizeLimit) {
      table.notes.push_back("N = " + std::to_string(n) + " skipped: coordinate descent needs more than 1e6 iterations");
      continue;
    }
    TableRow row;
    row.n = n;
    for (SamplerKind kind : kinds) {
      ExperimentSpec spec = base;
      spec.problem = ProblemKind::nesterov;
      spec.n = n;
      spec.r = 0;
      spec.level = 0;
      spec.method = method;
      spec.sampler = kind;
      spec.keep_traces = false;
      row.columns.push_back(run_experiment(spec));
    }
    row.j = row.columns.front().j;
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_table_text(const TableResult& table, std::ostream& out) {
  std::vector<int> widths;
  for (const auto& name : table.column_names) widths.push_back(std::max(12, static_cast<int>(name.size()) + 3));
  out << std::setw(5) << "N" << std::setw(7) << "J";
  for (std::size_t c = 0; c < widths.size(); ++c)
    out << " | " << std::setw(widths[c]) << (table.column_names[c] + " it") << std::setw(10) << "epoch";
  out << '\n';
  for (const TableRow& row : table.rows) {
    out << std::setw(5) << row.n << std::setw(7) << row.j;
    for (std::size_t c = 0; c < row.columns.size(); ++c) {
      const TrialSummary& s = row.columns[c];
      std::ostringstream it, ep;
      it << std::setprecision(6) << s.mean_iterations;
      ep << std::fixed << std::setprecision(2) << s.mean_epochs;
      out << " | " << std::setw(widths[c]) << it.str() << std::setw(10) << ep.str();
      if (s.converged_fraction < 1.0) out << '*';
    }
    out << '\n';
  }
  for (const auto& note : table.notes) out << "note: " << note << '\n';
}

void write_table_csv(const TableResult& table, std::ostream& out, bool include_timing) {
  write_summary_csv_header(out);
  for (const TableRow& row : table.rows)
    for (const TrialSummary& s : row.columns) write_summary_csv_row(s, out, include_timing);
}

void write_summary_csv_header(std::ostream& out) {
  out << "N,J,method,sampler,mean_iter,mean_epoch,converged_frac,seconds\n";
}

void write_summary_csv_row(const TrialSummary& s, std::ostream& out, bool include_timing) {
  out << s.n << ',' << s.j << ',' << to_string(s.method) << ',' << to_string(s.sampler) << ','
      << format_number(s.mean_iterations) << ',' << format_number(s.mean_epochs) << ','
      << format_number(s.converged_fraction) << ',' << format_number(include_timing ? s.seconds : 0.0) << '\n';
}

namespace {

nlohmann::ordered_json config_json(const ExperimentSpec& spec) {
  nlohmann::ordered_json j;
  j["problem"] = spec.problem == ProblemKind::nesterov ? "nesterov" : "matrix";
  if (spec.problem == ProblemKind::nesterov) {
    j["n"] = spec.n;
    j["r"] = spec.r == 0 ? spec.n : spec.r;
    j["lipschitz_L"] = spec.lipschitz;
  } else {
    j["matrix"] = spec.matrix_file.string();
    j["rhs"] = spec.rhs_file.string();
  }
  j["method"] = std::string(to_string(spec.method));
  j["sampler"] = std::string(to_string(spec.sampler));
  j["level"] = spec.level;
  j["block_size"] = spec.block_size;
  if (spec.fixed_step) j["step"] = *spec.fixed_step;
  j["lipschitz_scale"] = spec.lipschitz_scale;
  j["tolerance"] = spec.tolerance;
  j["max_iterations"] = spec.max_iterations;
  j["trials"] = spec.trials;
  j["seed"] = spec.seed;
  return j;
}

}  // namespace

std::string summary_json(const TrialSummary& s, const ExperimentSpec& spec, bool include_timing) {
  nlohmann::ordered_json j;
  j["N"] = s.n;
  j["J"] = s.j;
  j["method"] = std::string(to_string(s.method));
  j["sampler"] = std::string(to_string(s.sampler));
  j["mean_iter"] = s.mean_iterations;
  j["mean_epoch"] = s.mean_epochs;
  j["converged_frac"] = s.converged_fraction;
  j["seconds"] = include_timing ? s.seconds : 0.0;
  j["iterations"] = s.iterations;
  j["epochs"] = s.epochs;
  j["converged"] = s.converged;
  j["config"] = config_json(spec);
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Theory checks

namespace {

Vector random_vector(RandomStream& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform01() - 1.0;
  return v;
}

constexpr double kRateTolerance = 0.02;
constexpr std::uint64_t kRateIterationCap = 100000;

}  // namespace

TheoryReport theory_check(const ExperimentSpec& spec) {
  const ProblemSetup setup = build_problem(spec);
  const Decomposition& d = *setup.decomposition;
  const Objective& f = *setup.objective;
  const Index n = f.dimension();

  TheoryReport report;
  report.C_A = stability_constant(d);
  report.mean_L_A = d.mean_lipschitz();
  if (!setup.semidefinite) {
    const MetricConstants mc = quadratic_metric_constants(setup.quadratic->hessian_matrix(), d.preconditioner());
    report.mu_A = mc.mu;
    report.L_A = mc.lipschitz;
    const RateBound rb = linear_rate_bound(mc.mu, report.mean_L_A, report.C_A, d.size());
    report.rate_bound = rb.value;
    report.rate_clamped = rb.clamped;
  } else {
    report.L_A = generalized_extreme_eigenvalues(setup.quadratic->hessian_matrix(), d.preconditioner()).max;
  }

  RandomStream rng(spec.seed);
  CheckResult identity{"gradient_identity", true, kIdentityTolerance};
  CheckResult stable{"stable_decomposition", true, std::numeric_limits<double>::infinity()};
  for (std::size_t t = 0; t < kTheorySamples; ++t) {
    const IdentityReport r = decomposition_identity_check(random_vector(rng, n), d, report.C_A);
    identity.pass = identity.pass && r.identity_pass;
    identity.slack = std::min(identity.slack, kIdentityTolerance - r.identity_error);
    stable.pass = stable.pass && r.stability_pass;
    const double rhs = r.stability * r.metric_sum;
    stable.slack = std::min(stable.slack, rhs > 0.0 ? r.stability_slack / rhs : 0.0);
  }
  report.checks.push_back(identity);
  report.checks.push_back(stable);

  const std::vector<double> lipschitz = d.local_lipschitz();
  for (SamplerKind kind : {SamplerKind::proportional, SamplerKind::uniform}) {
    const std::vector<double> p = sampling_probabilities(kind, lipschitz);
    CheckResult decay{"expected_decay_" + std::string(to_string(kind)), true,
                      std::numeric_limits<double>::infinity()};
    for (std::size_t t = 0; t < kTheorySamples; ++t) {
      const DecayReport r = expected_decay_check(random_vector(rng, n), f, d, p, report.C_A);
      decay.pass = decay.pass && r.pass;
      decay.slack = std::min(decay.slack, r.slack);
      if (r.conservative && t == 0) decay.name += "_conservative";
    }
    report.checks.push_back(decay);
  }

  const bool subspace_method = spec.method != Method::gd && spec.method != Method::pgd;
  if (!setup.semidefinite && subspace_method) {
    ExperimentSpec runs = spec;
    runs.keep_traces = true;
    runs.max_iterations = std::min(spec.max_iterations, kRateIterationCap);
    const TrialSummary s = run_experiment(runs);
    const double f_star = f.known_minimum().value_or(f.value(quadratic_minimizer(*setup.quadratic)));
    const RateFit fit = empirical_rate_fit(s.traces, f_star);
    const double limit = report.rate_bound + kRateTolerance;
    report.checks.push_back({"linear_rate", fit.rate <= limit, limit - fit.rate});
  }
  return report;
}

std::string theory_report_json(const TheoryReport& report) {
  nlohmann::ordered_json j;
  j["mu_A"] = report.mu_A;
  j["L_A"] = report.L_A;
  j["mean_L_A"] = report.mean_L_A;
  j["C_A"] = report.C_A;
  j["rate_bound"] = report.rate_bound;
  j["rate_clamped"] = report.rate_clamped;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const CheckResult& c : report.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["slack"] = std::isfinite(c.slack) ? nlohmann::ordered_json(c.slack) : nlohmann::ordered_json(nullptr);
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["pass"] = report.passed();
  return j.dump(2);
}

}  // namespace subspace_descent
