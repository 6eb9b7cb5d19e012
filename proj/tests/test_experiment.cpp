#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "subspace_descent/experiment.hpp"

using namespace subspace_descent;

TEST_CASE("levels and sizes") {
  CHECK(level_for_size(7) == 3);
  CHECK(level_for_size(4095) == 12);
  CHECK_THROWS_AS(level_for_size(8), DimensionError);
}

TEST_CASE("problem assembly") {
  ExperimentSpec spec;
  spec.n = 15;
  SUBCASE("multilevel J column") {
    const Index expected[] = {11, 26, 57, 120, 247, 502, 1013, 2036, 4083, 8178};
    for (int level = 3; level <= 12; ++level) {
      spec.n = (Index{1} << level) - 1;
      CHECK(static_cast<Index>(build_problem(spec).decomposition->size()) == expected[level - 3]);
    }
  }
  SUBCASE("multilevel constants are L / 2") {
    spec.lipschitz = 4.0;
    for (double l : build_problem(spec).decomposition->local_lipschitz()) CHECK(l == doctest::Approx(2.0));
  }
  SUBCASE("mismatched level") {
    spec.level = 5;
    CHECK_THROWS_AS(build_problem(spec), DimensionError);
  }
  SUBCASE("semidefinite problems cannot use the Hessian metric") {
    spec.r = 5;
    spec.method = Method::pgd;
    CHECK_THROWS_AS(build_problem(spec), NotSpdError);
    spec.method = Method::rfasd;
    CHECK(build_problem(spec).semidefinite);
  }
  SUBCASE("block widths") {
    spec.method = Method::rbcd;
    spec.block_size = 4;
    CHECK(build_problem(spec).decomposition->size() == 4);
  }
}

TEST_CASE("experiments") {
  ExperimentSpec spec;
  spec.n = 15;
  spec.trials = 6;
  SUBCASE("means are exact arithmetic means") {
    const TrialSummary s = run_experiment(spec);
    const double total = std::accumulate(s.iterations.begin(), s.iterations.end(), 0.0);
    CHECK(s.mean_iterations == total / 6.0);
    CHECK(s.mean_epochs == s.mean_iterations / 26.0);
    CHECK(s.converged_fraction == 1.0);
    CHECK(s.j == 26);
  }
  SUBCASE("trials are reproducible and independent of the thread count") {
    const TrialSummary a = run_experiment(spec);
    setenv("SUBSPACE_DESCENT_THREADS", "1", 1);
    CHECK(trial_thread_count() == 1);
    const TrialSummary b = run_experiment(spec);
    setenv("SUBSPACE_DESCENT_THREADS", "3", 1);
    CHECK(trial_thread_count() == 3);
    CHECK(a.iterations == b.iterations);
    // Distinct seeds give distinct runs.
    CHECK(std::adjacent_find(a.iterations.begin(), a.iterations.end(), std::not_equal_to<>()) != a.iterations.end());
  }
  SUBCASE("trial seeds are consecutive") {
    ExperimentSpec one = spec;
    one.trials = 1;
    one.seed = spec.seed + 4;
    CHECK(run_experiment(one).iterations[0] == run_experiment(spec).iterations[4]);
  }
  SUBCASE("iteration cap is reported, not thrown") {
    spec.max_iterations = 10;
    const TrialSummary s = run_experiment(spec);
    CHECK(s.converged_fraction == 0.0);
  }
  SUBCASE("deterministic cyclic coordinate descent") {
    spec.method = Method::rcd;
    spec.sampler = SamplerKind::cyclic;
    spec.trials = 3;
    const TrialSummary s = run_experiment(spec);
    CHECK(s.iterations == std::vector<std::uint64_t>(3, s.iterations[0]));
    CHECK(std::abs(s.mean_iterations - 6465.0) <= 0.005 * 6465.0);
  }
}

TEST_CASE("output formats") {
  ExperimentSpec spec;
  spec.trials = 3;
  const TrialSummary s = run_experiment(spec);
  std::ostringstream a, b;
  write_summary_csv_header(a);
  write_summary_csv_row(s, a, false);
  write_summary_csv_header(b);
  write_summary_csv_row(run_experiment(spec), b, false);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("N,J,method,sampler,mean_iter,mean_epoch,converged_frac,seconds\n7,11,rfasd,uniform,", 0) == 0);

  const auto j = nlohmann::json::parse(summary_json(s, spec));
  CHECK(j["N"] == 7);
  CHECK(j["J"] == 11);
  CHECK(j["iterations"].size() == 3);
  CHECK(j["mean_iter"].get<double>() == s.mean_iterations);
  CHECK(j["config"]["trials"] == 3);
  CHECK(j["config"]["lipschitz_L"] == 2.0);

  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(6465) == "6465");
}

TEST_CASE("tables") {
  ExperimentSpec base;
  base.trials = 2;
  const TableResult t3 = reproduce_tables(3, {7, 15}, base);
  REQUIRE(t3.rows.size() == 2);
  CHECK(t3.rows[0].j == 11);
  CHECK(t3.rows[1].j == 26);
  CHECK(t3.rows[0].columns[2].iterations[0] == t3.rows[0].columns[2].iterations[1]);
  const TableResult t2 = reproduce_tables(2, {7, 127}, base);
  CHECK(t2.rows.size() == 1);
  CHECK(t2.notes.size() == 1);
  std::ostringstream text, csv;
  write_table_text(t2, text);
  write_table_csv(t2, csv, false);
  CHECK(text.str().find("127") != std::string::npos);
  CHECK(csv.str().find("7,7,rcd,cyclic,817,") != std::string::npos);
  CHECK_THROWS_AS(reproduce_tables(4, {7}, base), std::invalid_argument);
}

TEST_CASE("theory checks") {
  ExperimentSpec spec;
  SUBCASE("multilevel N = 7 passes") {
    const TheoryReport r = theory_check(spec);
    CHECK(r.passed());
    CHECK(r.mu_A == doctest::Approx(1.0));
    CHECK(r.L_A == doctest::Approx(1.0));
    CHECK(r.C_A == doctest::Approx(1.0));
    const auto j = nlohmann::json::parse(theory_report_json(r));
    CHECK(j["checks"].size() == 5);
    CHECK(j["pass"] == true);
  }
  SUBCASE("coordinate decomposition has C_A = 1") {
    spec.method = Method::rcd;
    const TheoryReport r = theory_check(spec);
    CHECK(r.C_A == doctest::Approx(1.0));
    CHECK(r.passed());
  }
  SUBCASE("halved Lipschitz constants fail the decay check") {
    spec.lipschitz_scale = 0.5;
    const TheoryReport r = theory_check(spec);
    CHECK_FALSE(r.passed());
    bool decay_failed = false;
    for (const auto& c : r.checks)
      if (c.name.rfind("expected_decay", 0) == 0 && !c.pass) decay_failed = true;
    CHECK(decay_failed);
  }
}
