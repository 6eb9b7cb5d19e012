#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subspace_descent/errors.hpp"
#include "subspace_descent/experiment.hpp"

namespace sd = subspace_descent;

namespace {

struct Options {
  std::string problem = "nesterov";
  std::string matrix;
  std::string rhs;
  long long n = 7;
  long long r = 0;
  double lipschitz = 2.0;
  std::string method = "rfasd";
  std::string sampler = "uniform";
  int level = 0;
  long long block_size = 2;
  double step = 0.0;
  double lipschitz_scale = 1.0;
  double tol = 1e-6;
  double max_iter = 2e6;
  std::size_t trials = 10;
  std::uint64_t seed = 42;
  std::string out;
  std::string format = "csv";
  std::string trace;
  std::string x0;
  bool omit_timing = false;
  int table = 3;
  std::vector<long long> sizes;
};

void add_problem_flags(CLI::App& app, Options& o) {
  app.add_option("--problem", o.problem, "nesterov or matrix")->check(CLI::IsMember({"nesterov", "matrix"}));
  app.add_option("--matrix", o.matrix, "symmetric coordinate-format matrix file (--problem matrix)");
  app.add_option("--rhs", o.rhs, "right-hand side file, whitespace-separated values (--problem matrix)");
  app.add_option("--n", o.n, "problem size N");
  app.add_option("--r", o.r, "intrinsic dimension r (0 means N)");
  app.add_option("--lipschitz-L", o.lipschitz, "Lipschitz constant L of the Nesterov function");
  app.add_option("--level", o.level, "multilevel depth; sets N = 2^level - 1 when --n is absent");
  app.add_option("--method", o.method, "gd, pgd, rcd, rbcd, rfasd, rfas");
  app.add_option("--sampler", o.sampler, "uniform, proportional, permutation, cyclic");
  app.add_option("--block-size", o.block_size, "RBCD block width");
  app.add_option("--step", o.step, "fixed step size (default 1/L_i)");
  app.add_option("--lipschitz-scale", o.lipschitz_scale, "multiply every local Lipschitz constant");
  app.add_option("--tol", o.tol, "relative gradient tolerance");
  app.add_option("--max-iter", o.max_iter, "iteration cap per trial");
  app.add_option("--trials", o.trials, "number of seeded trials")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "seed of the first trial");
  app.add_option("--x0", o.x0, "initial point file, whitespace-separated values");
}

sd::Vector read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sd::InputError("cannot open " + path);
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw sd::InputError("malformed number in " + path);
  return Eigen::Map<sd::Vector>(values.data(), static_cast<sd::Index>(values.size()));
}

sd::ExperimentSpec make_spec(const Options& o, const CLI::App& app) {
  sd::ExperimentSpec s;
  s.problem = o.problem == "matrix" ? sd::ProblemKind::matrix : sd::ProblemKind::nesterov;
  if (s.problem == sd::ProblemKind::matrix && (o.matrix.empty() || o.rhs.empty()))
    throw sd::InputError("--problem matrix needs --matrix and --rhs");
  s.matrix_file = o.matrix;
  s.rhs_file = o.rhs;
  s.n = o.n;
  if (o.level > 0 && app.count("--n") == 0) s.n = (sd::Index{1} << o.level) - 1;
  s.r = o.r;
  s.lipschitz = o.lipschitz;
  s.method = sd::parse_method(o.method);
  s.sampler = sd::parse_sampler_kind(o.sampler);
  s.level = o.level;
  s.block_size = o.block_size;
  if (app.count("--step") > 0) s.fixed_step = o.step;
  s.lipschitz_scale = o.lipschitz_scale;
  s.tolerance = o.tol;
  if (!(o.max_iter >= 1.0)) throw std::invalid_argument("--max-iter must be >= 1");
  s.max_iterations = static_cast<std::uint64_t>(std::llround(o.max_iter));
  s.trials = o.trials;
  s.seed = o.seed;
  if (!o.x0.empty()) s.initial_point = read_vector(o.x0);
  return s;
}

/// Writes to --out when given, else stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sd::InputError("cannot write " + path);
  out << text;
}

int run_command(const Options& o, const CLI::App& app) {
  sd::ExperimentSpec spec = make_spec(o, app);
  spec.keep_traces = !o.trace.empty();
  const sd::TrialSummary s = sd::run_experiment(spec);
  const bool timing = !o.omit_timing;

  std::ostringstream text;
  if (o.format == "json") {
    text << sd::summary_json(s, spec, timing) << '\n';
  } else {
    sd::write_summary_csv_header(text);
    sd::write_summary_csv_row(s, text, timing);
  }
  emit(o.out, text.str());

  if (!o.trace.empty()) {
    // One file per trial: <trace>.<trial>.csv when there are several.
    for (std::size_t t = 0; t < s.traces.size(); ++t) {
      const std::string path = s.traces.size() == 1 ? o.trace : o.trace + "." + std::to_string(t) + ".csv";
      std::ofstream out(path, std::ios::binary);
      if (!out) throw sd::InputError("cannot write " + path);
      sd::write_trace_csv(s.traces[t], out);
    }
  }
  if (s.converged_fraction < 1.0) {
    std::cerr << "warning: " << (1.0 - s.converged_fraction) * 100.0 << "% of trials hit the iteration cap\n";
    return 2;
  }
  return 0;
}

int tables_command(const Options& o, const CLI::App& app) {
  sd::ExperimentSpec base = make_spec(o, app);
  std::vector<sd::Index> sizes(o.sizes.begin(), o.sizes.end());
  if (sizes.empty())
    sizes = o.table == 2 ? std::vector<sd::Index>{7, 15, 31, 63}
                         : std::vector<sd::Index>{7, 15, 31, 63, 127, 255, 511, 1023, 2047, 4095};
  const sd::TableResult table = sd::reproduce_tables(o.table, sizes, base);
  write_table_text(table, std::cerr);
  std::ostringstream csv;
  sd::write_table_csv(table, csv, !o.omit_timing);
  emit(o.out, csv.str());
  for (const auto& row : table.rows)
    for (const auto& col : row.columns)
      if (col.converged_fraction < 1.0) return 2;
  return 0;
}

int check_command(const Options& o, const CLI::App& app) {
  const sd::ExperimentSpec spec = make_spec(o, app);
  const sd::TheoryReport report = sd::theory_check(spec);
  emit(o.out, sd::theory_report_json(report) + "\n");
  return report.passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized fast subspace descent experiments"};
  app.require_subcommand(1);
  Options o;

  CLI::App* run = app.add_subcommand("run", "run seeded trials of one method");
  add_problem_flags(*run, o);
  run->add_option("--out", o.out, "summary output path (default stdout)");
  run->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--trace", o.trace, "per-iteration trace CSV path");
  run->add_flag("--omit-timing", o.omit_timing, "write 0 in the seconds column for byte-stable output");

  CLI::App* tables = app.add_subcommand("tables", "reproduce the CD (2) or FASD (3) comparison table");
  add_problem_flags(*tables, o);
  tables->add_option("--table", o.table, "2 or 3")->check(CLI::IsMember({2, 3}));
  tables->add_option("--sizes", o.sizes, "problem sizes")->delimiter(',');
  tables->add_option("--out", o.out, "CSV output path (default stdout)");
  tables->add_flag("--omit-timing", o.omit_timing, "write 0 in the seconds column");

  CLI::App* check = app.add_subcommand("check", "verify the theoretical constants and inequalities");
  add_problem_flags(*check, o);
  check->add_option("--out", o.out, "report output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(o, *run);
    if (tables->parsed()) return tables_command(o, *tables);
    return check_command(o, *check);
  } catch (const sd::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
