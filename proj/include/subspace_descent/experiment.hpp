#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subspace_descent/analysis.hpp"
#include "subspace_descent/decomposition.hpp"
#include "subspace_descent/objective.hpp"
#include "subspace_descent/solver.hpp"

namespace subspace_descent {

enum class ProblemKind { nesterov, matrix };

struct ExperimentSpec {
  ProblemKind problem = ProblemKind::nesterov;
  Index n = 7;
  /// Intrinsic dimension; 0 means r = N.
  Index r = 0;
  double lipschitz = 2.0;
  std::filesystem::path matrix_file;
  std::filesystem::path rhs_file;

  Method method = Method::rfasd;
  SamplerKind sampler = SamplerKind::uniform;
  /// Multilevel depth; 0 derives it from N = 2^level - 1.
  int level = 0;
  /// Contiguous block width for RBCD.
  Index block_size = 2;
  std::optional<double> fixed_step;
  /// Multiplies every L_{A,i}; values below 1 overstate the step (negative control).
  double lipschitz_scale = 1.0;

  double tolerance = 1e-6;
  std::uint64_t max_iterations = 2'000'000;
  std::size_t trials = 10;
  std::uint64_t seed = 42;
  std::optional<Vector> initial_point;
  /// Keep full per-iteration traces of every trial.
  bool keep_traces = false;
};

/// Objective, decomposition, and metric assembled from a spec.
struct ProblemSetup {
  std::unique_ptr<Objective> objective;
  const QuadraticObjective* quadratic = nullptr;
  std::optional<Decomposition> decomposition;
  bool semidefinite = false;
};

/// Builds the objective and the decomposition the method runs on:
///  - gd: one full-space subspace in the identity metric
///  - pgd: one full-space subspace in the metric A = H
///  - rcd / rbcd: coordinates / contiguous blocks in the identity metric
///  - rfasd / rfas: multilevel hats in the metric tridiag(-1,2,-1) for the
///    Nesterov problem, A = H for a matrix problem
ProblemSetup build_problem(const ExperimentSpec& spec);

/// Level for N = 2^level - 1; throws DimensionError otherwise.
int level_for_size(Index n);

struct TrialSummary {
  Index n = 0;
  std::size_t j = 0;
  Method method = Method::rfasd;
  SamplerKind sampler = SamplerKind::uniform;
  std::vector<std::uint64_t> iterations;
  std::vector<double> epochs;
  std::vector<bool> converged;
  double mean_iterations = 0.0;
  double mean_epochs = 0.0;
  double converged_fraction = 0.0;
  double seconds = 0.0;
  std::vector<RunTrace> traces;
};

/// Runs spec.trials solver runs with seeds seed, seed+1, ... on up to
/// SUBSPACE_DESCENT_THREADS threads; results are folded in trial order.
TrialSummary run_experiment(const ExperimentSpec& spec);

/// Worker count from SUBSPACE_DESCENT_THREADS, else hardware concurrency.
unsigned trial_thread_count();

struct TableRow {
  Index n = 0;
  std::size_t j = 0;
  std::vector<TrialSummary> columns;
};

struct TableResult {
  int which = 3;
  std::vector<std::string> column_names;
  std::vector<TableRow> rows;
  std::vector<std::string> notes;
};

inline constexpr Index kCoordinateTableSizeLimit = 63;

/// which = 2: RCD, RCD_perm, cyclic CD. which = 3: RFASD, RFASD_perm, cyclic FASD.
/// Coordinate-descent sizes above kCoordinateTableSizeLimit are skipped with a note.
TableResult reproduce_tables(int which, const std::vector<Index>& sizes, const ExperimentSpec& base);

void write_table_text(const TableResult& table, std::ostream& out);
void write_table_csv(const TableResult& table, std::ostream& out, bool include_timing = true);

/// "N,J,method,sampler,mean_iter,mean_epoch,converged_frac,seconds"
void write_summary_csv_header(std::ostream& out);
void write_summary_csv_row(const TrialSummary& s, std::ostream& out, bool include_timing = true);
std::string summary_json(const TrialSummary& s, const ExperimentSpec& spec, bool include_timing = true);

inline constexpr std::size_t kTheorySamples = 100;

/// Constants, identity and decay checks at random points, and a comparison of
/// the fitted RFASD rate against the linear bound.
TheoryReport theory_check(const ExperimentSpec& spec);
std::string theory_report_json(const TheoryReport& report);

/// Shortest round-trip decimal form.
std::string format_number(double value);

}  // namespace subspace_descent
