#include "core/error.hpp"
#include "core/experiment.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace diffgraph;

namespace {

Scenario small_scenario() {
  Scenario sc;
  sc.model.p = 6;
  sc.model.m = 2;
  sc.model.p_er_delta = 0.3;
  sc.sample_sizes = {150, 300};
  sc.runs = 2;
  sc.threads = 1;
  sc.grid.grid_size = 5;
  return sc;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(Benchmark, OutcomesAreOrderedAndComplete) {
  const Scenario sc = small_scenario();
  const BenchmarkResult r = run_benchmark(sc);
  ASSERT_EQ(r.outcomes.size(), 2u * 2u * 3u);
  ASSERT_EQ(r.cells.size(), 2u * 3u);
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    const RunOutcome& o = r.outcomes[i];
    EXPECT_EQ(o.n, sc.sample_sizes[i / 6]);
    EXPECT_EQ(o.run, int((i / 3) % 2));
    EXPECT_EQ(o.penalty, sc.penalties[i % 3]);
    EXPECT_EQ(o.seed, sc.base_seed + std::uint64_t(o.run));
    EXPECT_TRUE(o.ok) << o.error;
    EXPECT_GE(o.report.f1, 0.0);
    EXPECT_LE(o.report.f1, o.best_grid_f1 + 1e-15);  // max-F1 picks the best grid point
    EXPECT_GT(o.lambda, 0.0);
    EXPECT_LT(o.lambda, o.lambda_sm);
  }
  for (const auto& cell : r.cells) {
    EXPECT_EQ(cell.runs, 2);
    EXPECT_EQ(cell.failed, 0);
    EXPECT_LE(cell.max_lla_ascent, 1e-10);
  }
}

TEST(Benchmark, RunsAreSharedAcrossPenalties) {
  Scenario sc = small_scenario();
  sc.sample_sizes = {200};
  sc.runs = 1;
  const BenchmarkResult r = run_benchmark(sc);
  for (const auto& o : r.outcomes) EXPECT_EQ(o.true_edges, r.outcomes[0].true_edges);
}

TEST(Benchmark, ThreadCountDoesNotChangeResults) {
  Scenario sc = small_scenario();
  const BenchmarkResult a = run_benchmark(sc);
  sc.threads = 3;
  const BenchmarkResult b = run_benchmark(sc);
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(a.outcomes[i].lambda, b.outcomes[i].lambda);
    EXPECT_EQ(a.outcomes[i].report.f1, b.outcomes[i].report.f1);
    EXPECT_EQ(a.outcomes[i].report.frob_error, b.outcomes[i].report.frob_error);
  }
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].metrics.f1.mean, b.cells[i].metrics.f1.mean);
    EXPECT_EQ(a.cells[i].metrics.frob_error.mean, b.cells[i].metrics.frob_error.mean);
  }
}

TEST(Benchmark, BicSelectionRuns) {
  Scenario sc = small_scenario();
  sc.sample_sizes = {300};
  sc.runs = 1;
  sc.penalties = {PenaltyKind::LogSum};
  sc.selection = LambdaSelection::Bic;
  const BenchmarkResult r = run_benchmark(sc);
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_TRUE(r.outcomes[0].ok) << r.outcomes[0].error;
  EXPECT_EQ(r.outcomes[0].algorithm, Algorithm::Lla);
}

TEST(Benchmark, BicIsCloseToTheBestGridPointOnASmallEr) {
  Scenario sc;
  sc.model.p = 30;
  sc.model.m = 2;
  sc.sample_sizes = {1600};
  sc.runs = 2;
  sc.threads = 1;
  sc.penalties = {PenaltyKind::LogSum};
  sc.selection = LambdaSelection::Bic;
  const BenchmarkResult r = run_benchmark(sc);
  for (const auto& o : r.outcomes) {
    ASSERT_TRUE(o.ok) << o.error;
    EXPECT_GE(o.report.f1, o.best_grid_f1 - 0.15) << "run " << o.run;
  }
}

TEST(Benchmark, ProgressSeesEveryOutcome) {
  Scenario sc = small_scenario();
  sc.runs = 1;
  std::size_t calls = 0;
  run_benchmark(sc, [&](const RunOutcome&) { ++calls; });
  EXPECT_EQ(calls, 2u * 3u);
}

TEST(Benchmark, CsvAndTableShapes) {
  Scenario sc = small_scenario();
  sc.runs = 1;
  sc.sample_sizes = {150};
  const BenchmarkResult r = run_benchmark(sc);
  EXPECT_EQ(count_lines(outcomes_csv(r)), 1u + 3u);
  EXPECT_EQ(count_lines(summary_csv(r)), 1u + 3u);
  EXPECT_EQ(outcomes_csv(r).rfind("n,run,seed,penalty,algorithm,ok,", 0), 0u);
  const std::string table = summary_table(r);
  for (const char* word : {"lasso", "logsum", "scad", "F1"}) EXPECT_NE(table.find(word), std::string::npos) << word;
}

TEST(Scenario, ValidationAndNames) {
  Scenario sc = small_scenario();
  sc.runs = 0;
  EXPECT_THROW(run_benchmark(sc), Error);
  sc = small_scenario();
  sc.sample_sizes = {};
  EXPECT_THROW(run_benchmark(sc), Error);
  sc = small_scenario();
  sc.epsilon = 2.0;
  EXPECT_THROW(run_benchmark(sc), Error);
  EXPECT_EQ(parse_lambda_selection("bic"), LambdaSelection::Bic);
  EXPECT_EQ(to_string(LambdaSelection::MaxF1), "maxf1");
  EXPECT_THROW(parse_lambda_selection("cv"), Error);
}

TEST(MaxTraceAscent, ReportsLargestIncrease) {
  EstimationResult r;
  PgdRun a;
  a.trace = {{0, 5.0, 0, 0}, {1, 4.0, 0, 0}, {2, 4.5, 0, 0}};
  PgdRun b;
  b.trace = {{0, 1.0, 0, 0}, {1, 1.2, 0, 0}};
  r.runs = {a, b};
  EXPECT_DOUBLE_EQ(max_trace_ascent(r), 0.5);
  EXPECT_EQ(max_trace_ascent(EstimationResult{}), 0.0);
}
