#pragma once

#include "metrics.hpp"
#include "modelsel.hpp"
#include "penalty.hpp"
#include "solver.hpp"
#include "synth.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace diffgraph {

enum class LambdaSelection {
  MaxF1,  // grid point with the best F1 against the truth
  Bic,    // BIC on standardized covariances
};

std::string_view to_string(LambdaSelection s);
LambdaSelection parse_lambda_selection(std::string_view name);

struct Scenario {
  SynthParams model;  // model.seed is replaced by base_seed + run
  std::vector<Index> sample_sizes = {1600};
  std::vector<PenaltyKind> penalties = {PenaltyKind::Lasso, PenaltyKind::LogSum, PenaltyKind::Scad};
  double epsilon = kDefaultLogSumEpsilon;
  double a = kDefaultScadA;
  int runs = 10;
  std::uint64_t base_seed = 1;
  LambdaSelection selection = LambdaSelection::MaxF1;
  SolverConfig solver;  // algorithm Auto routes per penalty
  GridOptions grid;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct RunOutcome {
  int run = 0;
  std::uint64_t seed = 0;
  Index n = 0;
  PenaltyKind penalty = PenaltyKind::Lasso;
  Algorithm algorithm = Algorithm::Auto;
  bool ok = false;
  std::string error;
  double lambda = 0.0;
  double lambda_sm = 0.0;
  EvalReport report;
  double time = 0.0;  // solver wall time at the selected lambda
  int iterations = 0;
  bool converged = false;
  double best_grid_f1 = 0.0;   // max F1 over the grid actually estimated
  double max_lla_ascent = 0.0; // largest per-step objective increase over every LLA-algorithm inner run
  std::size_t true_edges = 0;
};

struct CellSummary {
  Index n = 0;
  PenaltyKind penalty = PenaltyKind::Lasso;
  int runs = 0;
  int failed = 0;
  Summary metrics;
  MeanSd time;
  MeanSd best_grid_f1;
  double max_lla_ascent = 0.0;
};

struct BenchmarkResult {
  std::vector<RunOutcome> outcomes;  // ordered by (n, run, penalty)
  std::vector<CellSummary> cells;    // ordered by (n, penalty)
};

using ProgressCallback = std::function<void(const RunOutcome&)>;

/// Runs every (n, run, penalty) combination: the model and samples for run r come from seed
/// base_seed + r and are shared by all penalties and sample sizes of that run.
BenchmarkResult run_benchmark(const Scenario& scenario, const ProgressCallback& progress = {});

/// Largest objective increase between consecutive entries of any run's trace (0 if none).
double max_trace_ascent(const EstimationResult& result);

std::string outcomes_csv(const BenchmarkResult& result);
std::string summary_csv(const BenchmarkResult& result);
/// Rows F1, Hamming, error, time per (n, penalty) cell as "mean (sd)".
std::string summary_table(const BenchmarkResult& result);

}  // namespace diffgraph
