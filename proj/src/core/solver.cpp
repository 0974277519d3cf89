#include "solver.hpp"

#include "error.hpp"
#include "matrix_io.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

namespace diffgraph {
namespace {

constexpr double kDenominatorFloor = 1e-12;
constexpr double kSmallStepWarning = 1e-8;

using Clock = std::chrono::steady_clock;

int count_active_blocks(const Eigen::MatrixXd& d, Index m) {
  const Index p = d.rows() / m;
  int active = 0;
  for (Index l = 0; l < p; ++l)
    for (Index k = 0; k < p; ++k)
      if (d.block(k * m, l * m, m, m).squaredNorm() > 0.0) ++active;
  return active;
}

double max_block_change(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Index m) {
  const Index p = a.rows() / m;
  double best = 0.0;
  for (Index l = 0; l < p; ++l)
    for (Index k = 0; k < p; ++k)
      best = std::max(best, (a.block(k * m, l * m, m, m) - b.block(k * m, l * m, m, m)).norm());
  return best;
}

double weighted_block_sum(const Eigen::MatrixXd& d, Index m, const Eigen::MatrixXd& w) {
  const Index p = d.rows() / m;
  double total = 0.0;
  for (Index l = 0; l < p; ++l)
    for (Index k = 0; k < p; ++k)
      if (w(k, l) != 0.0) total += w(k, l) * d.block(k * m, l * m, m, m).norm();
  return total;
}

/// Shared PGD loop. `smooth_extra` adds to the loss gradient, `penalty` evaluates the monitored
/// non-smooth part, `prox` applies the block soft-threshold with step eta.
struct PgdProblem {
  std::function<void(const Eigen::MatrixXd& delta, Eigen::MatrixXd& grad)> smooth_extra;
  std::function<double(const Eigen::MatrixXd& delta)> penalty;
  std::function<void(Eigen::MatrixXd& a, double eta)> prox;
};

PgdRun run_pgd(const CovariancePair& cov, Eigen::MatrixXd& delta, double step, const PgdProblem& problem,
               const SolverConfig& config, std::string stage) {
  const Index m = cov.block_size();
  PgdRun run;
  run.stage = std::move(stage);
  run.step = step;

  LossAndGradient eval = dtrace_loss_and_gradient(delta, cov);
  double objective = eval.loss + problem.penalty(delta);
  require(std::isfinite(objective), ErrorCode::Diverged, run.stage + ": non-finite objective at the start point");
  run.trace.push_back({0, objective, 0.0, count_active_blocks(delta, m)});

  Eigen::MatrixXd next(delta.rows(), delta.cols());
  for (int i = 0; i < config.i_max; ++i) {
    if (problem.smooth_extra) problem.smooth_extra(delta, eval.gradient);
    next = delta - step * eval.gradient;
    problem.prox(next, step);

    LossAndGradient next_eval = dtrace_loss_and_gradient(next, cov);
    const double next_objective = next_eval.loss + problem.penalty(next);
    if (!std::isfinite(next_objective))
      fail(ErrorCode::Diverged, run.stage + ": objective became non-finite at iteration " + std::to_string(i + 1));

    run.trace.push_back({i + 1, next_objective, max_block_change(next, delta, m), count_active_blocks(next, m)});
    run.iterations = i + 1;

    const double change = next_objective - objective;
    const double scale = std::max(std::abs(objective), kDenominatorFloor);
    const bool descent = change <= 1e-12 * std::max(1.0, std::abs(objective));
    delta.swap(next);
    eval = std::move(next_eval);
    objective = next_objective;
    if (descent && std::abs(change) / scale <= config.delta_tol) {
      run.converged = true;
      break;
    }
  }
  return run;
}

Eigen::MatrixXd start_point(const CovariancePair& cov, const SolverConfig& config) {
  if (config.warm_start == WarmStart::Supplied) {
    require(config.initial.has_value(), ErrorCode::InvalidArgument, "warm start 'supplied' requires an initial matrix");
    require(config.initial->same_layout(cov.sigma_x), ErrorCode::ShapeMismatch,
            "initial matrix layout does not match the covariances");
    return config.initial->dense();
  }
  return Eigen::MatrixXd::Zero(cov.sigma_x.side(), cov.sigma_x.side());
}

PgdRun lasso_pass(const CovariancePair& cov, double lambda, double step, Eigen::MatrixXd& delta,
                  const SolverConfig& config, std::string stage) {
  const Index m = cov.block_size();
  PgdProblem problem;
  problem.penalty = [lambda, m](const Eigen::MatrixXd& d) {
    const Index p = d.rows() / m;
    double total = 0.0;
    for (Index l = 0; l < p; ++l)
      for (Index k = 0; k < p; ++k) total += d.block(k * m, l * m, m, m).norm();
    return lambda * total;
  };
  problem.prox = [lambda, m](Eigen::MatrixXd& a, double eta) { prox_block_l2_inplace(a, m, lambda, eta); };
  return run_pgd(cov, delta, step, problem, config, std::move(stage));
}

void finish(EstimationResult& result, Eigen::MatrixXd delta, Index m, const SolverConfig& config) {
  result.delta_hat = BlockMatrix(std::move(delta), m);
  result.delta_hat_sym = symmetrize(result.delta_hat);
  result.edge_set = edges_from(result.delta_hat_sym, config.edge_threshold);
  result.converged = !result.runs.empty();
  result.total_iterations = 0;
  for (const auto& r : result.runs) {
    result.converged = result.converged && r.converged;
    result.total_iterations += r.iterations;
  }
  if (!result.runs.empty()) {
    const auto& last = result.runs.back();
    result.iterations = last.iterations;
    result.objective_trace.clear();
    for (const auto& rec : last.trace) result.objective_trace.push_back(rec.objective);
  }
}

double checked_lipschitz(double value) {
  require(std::isfinite(value) && value > 0.0, ErrorCode::Numerical,
          "Lipschitz constant must be positive and finite (got " + io::format_double(value) + ")");
  return value;
}

bool starts_from_lasso(const PenaltySpec& spec, const SolverConfig& config) {
  if (spec.kind == PenaltyKind::Lasso) return config.warm_start == WarmStart::Lasso;
  return config.warm_start == WarmStart::Default || config.warm_start == WarmStart::Lasso;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Auto: return "auto";
    case Algorithm::Lla: return "lla";
    case Algorithm::Redistribution: return "redistribution";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "auto") return Algorithm::Auto;
  if (name == "lla") return Algorithm::Lla;
  if (name == "redistribution") return Algorithm::Redistribution;
  fail(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(name) + "' (expected lla|redistribution)");
}

Algorithm default_algorithm(PenaltyKind kind) {
  return kind == PenaltyKind::LogSum ? Algorithm::Lla : Algorithm::Redistribution;
}

void SolverConfig::validate() const {
  require(i_max >= 1, ErrorCode::InvalidArgument, "i_max must be at least 1");
  require(std::isfinite(delta_tol) && delta_tol > 0.0, ErrorCode::InvalidArgument, "delta_tol must be positive");
  require(lla_rounds >= 1, ErrorCode::InvalidArgument, "lla_rounds must be at least 1");
  require(edge_threshold >= 0.0, ErrorCode::InvalidArgument, "edge_threshold must be nonnegative");
}

EstimationResult pgd_lla(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config) {
  spec.validate();
  config.validate();
  const auto t0 = Clock::now();
  const Index m = cov.block_size();
  const double step = 1.0 / checked_lipschitz(lipschitz_lla(cov));

  EstimationResult result;
  result.algorithm = Algorithm::Lla;
  result.penalty = spec;

  Eigen::MatrixXd delta = start_point(cov, config);
  if (spec.kind == PenaltyKind::Lasso) {
    result.runs.push_back(lasso_pass(cov, spec.lambda, step, delta, config, "lasso"));
  } else {
    // Round 1 produces the reweighting anchor: a lasso solve, a supplied matrix, or zero.
    if (starts_from_lasso(spec, config)) result.runs.push_back(lasso_pass(cov, spec.lambda, step, delta, config, "lasso"));
    for (int round = 2; round <= config.lla_rounds; ++round) {
      const Eigen::MatrixXd weights = lla_weights(spec, BlockMatrix(delta, m));
      PgdProblem problem;
      problem.penalty = [&weights, m](const Eigen::MatrixXd& d) { return weighted_block_sum(d, m, weights); };
      problem.prox = [&weights, m](Eigen::MatrixXd& a, double eta) { prox_block_l2_inplace(a, m, weights, eta); };
      result.runs.push_back(run_pgd(cov, delta, step, problem, config, "lla-round-" + std::to_string(round)));
    }
    if (result.runs.empty()) {
      // lla_rounds == 1 without a lasso anchor: the single round is the lasso itself
      result.runs.push_back(lasso_pass(cov, spec.lambda, step, delta, config, "lasso"));
    }
  }
  finish(result, std::move(delta), m, config);
  result.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

EstimationResult pgd_redistributed(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config) {
  spec.validate();
  config.validate();
  const auto t0 = Clock::now();
  const Index m = cov.block_size();
  const double lc1 = checked_lipschitz(lipschitz_lla(cov));
  const double lc2 = checked_lipschitz(lipschitz_redistributed(cov, spec, m));
  const double step = 1.0 / lc2;

  EstimationResult result;
  result.algorithm = Algorithm::Redistribution;
  result.penalty = spec;
  if (step < kSmallStepWarning)
    result.warnings.push_back("step size " + io::format_double(step) +
                              " is below 1e-8; the redistributed Lipschitz constant is too large to make progress");

  Eigen::MatrixXd delta = start_point(cov, config);
  if (starts_from_lasso(spec, config)) result.runs.push_back(lasso_pass(cov, spec.lambda, 1.0 / lc1, delta, config, "lasso"));

  PgdProblem problem;
  const double lambda = spec.lambda;
  if (spec.kind != PenaltyKind::Lasso) {
    problem.smooth_extra = [&spec, m](const Eigen::MatrixXd& d, Eigen::MatrixXd& grad) {
      const Index p = d.rows() / m;
      for (Index l = 0; l < p; ++l) {
        for (Index k = 0; k < p; ++k) {
          const auto blk = d.block(k * m, l * m, m, m);
          const double norm = blk.norm();
          if (norm == 0.0) continue;
          const double factor = rho_prime(spec, norm) - spec.lambda;
          if (factor != 0.0) grad.block(k * m, l * m, m, m) += (factor / norm) * blk;
        }
      }
    };
  }
  problem.penalty = [&spec, m](const Eigen::MatrixXd& d) {
    const Index p = d.rows() / m;
    double total = 0.0;
    for (Index l = 0; l < p; ++l)
      for (Index k = 0; k < p; ++k) total += rho(spec, d.block(k * m, l * m, m, m).norm());
    return total;
  };
  problem.prox = [lambda, m](Eigen::MatrixXd& a, double eta) { prox_block_l2_inplace(a, m, lambda, eta); };
  result.runs.push_back(run_pgd(cov, delta, step, problem, config, "redistribution"));

  finish(result, std::move(delta), m, config);
  result.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

EstimationResult estimate(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config) {
  const Algorithm algo = config.algorithm == Algorithm::Auto ? default_algorithm(spec.kind) : config.algorithm;
  return algo == Algorithm::Lla ? pgd_lla(cov, spec, config) : pgd_redistributed(cov, spec, config);
}

std::string trace_csv(const EstimationResult& result) {
  std::string out = "run,stage,iter,objective,max_block_change,active_blocks\n";
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    for (const auto& rec : result.runs[r].trace) {
      out += std::to_string(r) + "," + result.runs[r].stage + "," + std::to_string(rec.iter) + "," +
             io::format_double(rec.objective) + "," + io::format_double(rec.max_block_change) + "," +
             std::to_string(rec.active_blocks) + "\n";
    }
  }
  return out;
}

}  // namespace diffgraph
