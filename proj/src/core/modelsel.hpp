#pragma once

#include "loss.hpp"
#include "penalty.hpp"
#include "solver.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace diffgraph {

enum class GridMode { Synthetic, Real };

struct GridOptions {
  GridMode mode = GridMode::Synthetic;
  int grid_size = 20;
  double seed_lambda = 1.0;
  double lambda_floor = 1e-6;  // below this the model is treated as empty for every lambda
  double rel_precision = 0.01;
  int max_bisection_steps = 20;
  int max_solver_calls = 60;

  void validate() const;
};

struct LambdaGrid {
  double lambda_sm = 0.0;
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;
  std::vector<double> points;  // ascending, log-spaced
  int solver_calls = 0;        // spent locating lambda_sm
};

struct BicPoint {
  double lambda = 0.0;
  double bic = 0.0;
  std::size_t edges = 0;
  double objective = 0.0;
};

struct Selection {
  double lambda_star = 0.0;
  std::size_t index = 0;
  EstimationResult result;
  std::vector<BicPoint> curve;
};

/// Called once per grid point, in ascending lambda order, with the estimate for that point.
using GridVisitor = std::function<void(std::size_t index, double lambda, const EstimationResult& result)>;

/// (n_x + n_y) ||S_x D S_y - (S_x - S_y)||_F + ln(n_x + n_y) * (number of nonzero entries of D).
double bic(const BlockMatrix& delta_hat, const CovariancePair& cov);

/// Congruence by diag(S_x)^{-1/2}: S -> V S V and D -> V^{-1} D V^{-1}.
std::pair<CovariancePair, BlockMatrix> rescale_for_bic(const CovariancePair& cov, const BlockMatrix& delta_hat);

/// Covariances rescaled to unit diagonal of S_x, plus the scale vector diag(S_x)^{-1/2}.
std::pair<CovariancePair, Eigen::VectorXd> standardize(const CovariancePair& cov);

/// Smallest lambda (to options.rel_precision) whose estimate has no edges.
double find_lambda_sm(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config,
                      const GridOptions& options, int* solver_calls = nullptr);

LambdaGrid make_grid(double lambda_sm, GridMode mode, int grid_size);

LambdaGrid build_grid(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config,
                      const GridOptions& options = {});

/// Estimates on the supplied covariances at every grid point and scores each by BIC after
/// rescale_for_bic. Ties go to the larger lambda.
Selection select(const CovariancePair& cov, const PenaltySpec& spec, const SolverConfig& config,
                 const LambdaGrid& grid, const GridVisitor& visit = {});

struct StandardizedSelection {
  LambdaGrid grid;  // on the standardized scale
  Selection selection;
  Eigen::VectorXd scale;
};

/// Standardizes the covariances, builds the grid and selects there; the selected estimate is
/// mapped back to the original feature scale. The visitor sees standardized-scale estimates.
StandardizedSelection select_standardized(const CovariancePair& cov, const PenaltySpec& spec,
                                          const SolverConfig& config, const GridOptions& options = {},
                                          const GridVisitor& visit = {});

}  // namespace diffgraph
