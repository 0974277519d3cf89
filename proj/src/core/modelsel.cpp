#include "modelsel.hpp"

#include "error.hpp"
#include "matrix_io.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace diffgraph {
namespace {

Eigen::VectorXd inverse_sqrt_diagonal(const BlockMatrix& sigma) {
  const Eigen::VectorXd diag = sigma.dense().diagonal();
  for (Index i = 0; i < diag.size(); ++i)
    require(diag(i) > 0.0, ErrorCode::InvalidArgument,
            "diagonal entry " + std::to_string(i) + " of sigma_x is not positive");
  return diag.cwiseSqrt().cwiseInverse();
}

BlockMatrix congruence(const BlockMatrix& a, const Eigen::VectorXd& v) {
  return BlockMatrix(v.asDiagonal() * a.dense() * v.asDiagonal(), a.block_size());
}

CovariancePair scaled_pair(const CovariancePair& cov, const Eigen::VectorXd& v) {
  CovariancePair out;
  out.sigma_x = congruence(cov.sigma_x, v);
  out.sigma_y = congruence(cov.sigma_y, v);
  out.n_x = cov.n_x;
  out.n_y = cov.n_y;
  return out;
}

}  // namespace

void GridOptions::validate() const {
  require(grid_size >= 1, ErrorCode::InvalidArgument, "grid_size must be at least 1");
  require(seed_lambda > 0.0 && std::isfinite(seed_lambda), ErrorCode::InvalidArgument, "seed_lambda must be positive");
  require(lambda_floor > 0.0 && lambda_floor < seed_lambda, ErrorCode::InvalidArgument,
          "lambda_floor must be positive and below seed_lambda");
  require(rel_precision > 0.0 && rel_precision < 1.0, ErrorCode::InvalidArgument, "rel_precision must be in (0,1)");
  require(max_bisection_steps >= 0, ErrorCode::InvalidArgument, "max_bisection_steps must be nonnegative");
  require(max_solver_calls >= 1, ErrorCode::InvalidArgument, "max_solver_calls must be at least 1");
}

double bic(const BlockMatrix& delta_hat, const CovariancePair& cov) {
  require(delta_hat.same_layout(cov.sigma_x), ErrorCode::ShapeMismatch, "bic: estimate and covariances differ in layout");
  const double n = static_cast<double>(cov.n_x + cov.n_y);
  const Eigen::MatrixXd& sx = cov.sigma_x.dense();
  const Eigen::MatrixXd& sy = cov.sigma_y.dense();
  const double fit = (sx * delta_hat.dense() * sy - (sx - sy)).norm();
  const auto nonzeros = (delta_hat.dense().array() != 0.0).count();
  return n * fit + std::log(n) * static_cast<double>(nonzeros);
}

std::pair<CovariancePair, BlockMatrix> rescale_for_bic(const CovariancePair& cov, const BlockMatrix& delta_hat) {
  require(delta_hat.same_layout(cov.sigma_x), ErrorCode::ShapeMismatch,
          "rescale_for_bic: estimate and covariances differ in layout");
  const Eigen::VectorXd v = inverse_sqrt_diagonal(cov.sigma_x);
  return {scaled_pair(cov, v), congruence(delta_hat, v.cwiseInverse())};
}

std::pair<CovariancePair, Eigen::VectorXd> standardize(const CovariancePair& cov) {
  const Eigen::VectorXd v = inverse_sqrt_diagonal(cov.sigma_x);
  return {scaled_pair(cov, v), v};
}

double find_lambda_sm(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config,
                      const GridOptions& options, int* solver_calls) {
  options.validate();
  int calls = 0;
  auto empty_at = [&](double lambda) {
    if (calls >= options.max_solver_calls)
      fail(ErrorCode::SearchFailed, "no-edge threshold search exceeded " + std::to_string(options.max_solver_calls) +
                                        " solver calls");
    ++calls;
    return estimate(cov, spec.with_lambda(lambda), config).edge_set.empty();
  };

  double lo = 0.0;  // largest lambda known to give edges
  double hi = 0.0;  // smallest lambda known to give no edges
  double lambda = options.seed_lambda;
  if (empty_at(lambda)) {
    hi = lambda;
    while (true) {
      lambda /= 2.0;
      if (lambda < options.lambda_floor) {
        if (solver_calls) *solver_calls = calls;
        return empty_at(options.lambda_floor) ? options.lambda_floor : hi;
      }
      if (!empty_at(lambda)) {
        lo = lambda;
        break;
      }
      hi = lambda;
    }
  } else {
    lo = lambda;
    while (true) {
      lambda *= 2.0;
      require(std::isfinite(lambda), ErrorCode::SearchFailed, "no-edge threshold search overflowed");
      if (empty_at(lambda)) {
        hi = lambda;
        break;
      }
      lo = lambda;
    }
  }
  for (int step = 0; step < options.max_bisection_steps && (hi - lo) > options.rel_precision * hi; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (empty_at(mid)) hi = mid;
    else lo = mid;
  }
  if (solver_calls) *solver_calls = calls;
  return hi;
}

LambdaGrid make_grid(double lambda_sm, GridMode mode, int grid_size) {
  require(lambda_sm > 0.0 && std::isfinite(lambda_sm), ErrorCode::InvalidArgument, "lambda_sm must be positive");
  require(grid_size >= 1, ErrorCode::InvalidArgument, "grid_size must be at least 1");
  LambdaGrid grid;
  grid.lambda_sm = lambda_sm;
  if (mode == GridMode::Synthetic) {
    grid.lambda_upper = lambda_sm / 2.0;
    grid.lambda_lower = grid.lambda_upper / 10.0;
  } else {
    grid.lambda_upper = lambda_sm;
    grid.lambda_lower = grid.lambda_upper / 5.0;
  }
  if (grid_size == 1) {
    grid.points = {grid.lambda_upper};
    return grid;
  }
  const double log_lo = std::log(grid.lambda_lower);
  const double log_hi = std::log(grid.lambda_upper);
  for (int i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / (grid_size - 1);
    grid.points.push_back(std::exp(log_lo + t * (log_hi - log_lo)));
  }
  grid.points.front() = grid.lambda_lower;
  grid.points.back() = grid.lambda_upper;
  return grid;
}

LambdaGrid build_grid(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config,
                      const GridOptions& options) {
  int calls = 0;
  const double lambda_sm = find_lambda_sm(cov, spec, config, options, &calls);
  LambdaGrid grid = make_grid(lambda_sm, options.mode, options.grid_size);
  grid.solver_calls = calls;
  return grid;
}

Selection select(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config,
                 const LambdaGrid& grid, const GridVisitor& visit) {
  require(!grid.points.empty(), ErrorCode::InvalidArgument, "select: empty lambda grid");
  Selection out;
  double best = std::numeric_limits<double>::infinity();
  std::string last_error;
  bool any = false;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const double lambda = grid.points[i];
    const PenaltySpec at = spec.with_lambda(lambda);
    EstimationResult result;
    try {
      result = estimate(cov, at, config);
    } catch (const Error& e) {
      last_error = e.what();
      continue;
    }
    if (visit) visit(i, lambda, result);
    const auto [scaled_cov, scaled_delta] = rescale_for_bic(cov, result.delta_hat_sym);
    BicPoint point{lambda, bic(scaled_delta, scaled_cov), result.edge_set.size(),
                   penalized_objective(result.delta_hat, cov, at)};
    out.curve.push_back(point);
    if (!any || point.bic <= best) {
      best = point.bic;
      out.lambda_star = lambda;
      out.index = i;
      out.result = std::move(result);
      any = true;
    }
  }
  require(any, ErrorCode::Numerical, "select: every grid estimate failed (last: " + last_error + ")");
  return out;
}

StandardizedSelection select_standardized(const CovariancePair& cov, const PenaltySpec& spec,
                                          const SolverConfig& config, const GridOptions& options,
                                          const GridVisitor& visit) {
  StandardizedSelection out;
  auto [scaled, v] = standardize(cov);
  out.scale = v;
  out.grid = build_grid(scaled, spec, config, options);
  out.selection = select(scaled, spec, config, out.grid, visit);

  EstimationResult& r = out.selection.result;
  r.delta_hat = congruence(r.delta_hat, v);
  r.delta_hat_sym = symmetrize(r.delta_hat);
  r.edge_set = edges_from(r.delta_hat_sym, config.edge_threshold);
  return out;
}

}  // namespace diffgraph
