#pragma once

#include "blockmat.hpp"
#include "loss.hpp"
#include "penalty.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace diffgraph {

enum class Algorithm {
  Auto,            // lasso -> redistribution, log-sum -> LLA, SCAD -> redistribution
  Lla,             // PGD on the local linear approximation, reweighted in rounds
  Redistribution,  // PGD with the smooth non-convex remainder moved into the gradient
};

enum class WarmStart {
  Default,  // zeros for lasso, converged lasso solution otherwise
  Zeros,
  Lasso,
  Supplied,
};

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);
Algorithm default_algorithm(PenaltyKind kind);

struct SolverConfig {
  Algorithm algorithm = Algorithm::Auto;
  int i_max = 200;
  double delta_tol = 1e-3;
  WarmStart warm_start = WarmStart::Default;
  std::optional<BlockMatrix> initial;  // used with WarmStart::Supplied
  int lla_rounds = 2;                  // the lasso pass counts as round 1
  double edge_threshold = 0.0;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double max_block_change = 0.0;
  int active_blocks = 0;
};

/// One inner PGD run (a lasso pass, an LLA round or a redistribution run).
struct PgdRun {
  std::string stage;
  std::vector<IterationRecord> trace;  // entry 0 is the starting point
  int iterations = 0;
  bool converged = false;
  double step = 0.0;
};

struct EstimationResult {
  BlockMatrix delta_hat;      // final iterate, not symmetrized
  BlockMatrix delta_hat_sym;  // (delta_hat + delta_hat^T) / 2
  EdgeSet edge_set;
  std::vector<double> objective_trace;  // objective of the final run
  int iterations = 0;                   // iterations of the final run
  int total_iterations = 0;
  bool converged = false;  // every run converged
  double wall_time = 0.0;  // seconds
  Algorithm algorithm = Algorithm::Auto;
  PenaltySpec penalty;
  std::vector<PgdRun> runs;
  std::vector<std::string> warnings;
};

EstimationResult pgd_lla(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config);
EstimationResult pgd_redistributed(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config);

/// Dispatches on config.algorithm, resolving Auto through default_algorithm().
EstimationResult estimate(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config);

/// CSV with columns run,stage,iter,objective,max_block_change,active_blocks.
std::string trace_csv(const EstimationResult& result);

}  // namespace diffgraph
