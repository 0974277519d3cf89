#pragma once

#include "blockmat.hpp"
#include "loss.hpp"
#include "penalty.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace diffgraph {

inline constexpr double kDefaultTau = 3.0;

struct TheoryConstants {
  double M = 0.0;
  double M_sigma = 0.0;
  double kappa_gamma = 0.0;
  double alpha = 1.0;
  double sigma_bar_xy = 0.0;
  double C0 = 0.0;
  double tau = kDefaultTau;
  double phi_min_star = 0.0;  // phi_min(sigma_x*) * phi_min(sigma_y*)
  bool irrepresentable = true;
  Index p = 0;
  Index m = 0;
  Index s = 0;  // ordered support block positions, both orientations of every edge
};

/// Support positions (k, l) and (l, k) of every edge, as bvec block indices l*p + k, ascending.
std::vector<Index> ordered_support(const EdgeSet& support);

/// Block Frobenius norms of a matrix partitioned into bs x bs blocks (not necessarily square overall).
Eigen::MatrixXd block_norms_rect(const Eigen::MatrixXd& a, Index bs);

/// Rows/columns of the positions in `rows` and `cols`, each position spanning m^2 entries.
Eigen::MatrixXd gamma_submatrix(const Eigen::MatrixXd& gamma, const std::vector<Index>& rows,
                                const std::vector<Index>& cols, Index m);

TheoryConstants compute_constants(const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                                  const EdgeSet& support, double tau = kDefaultTau,
                                  Index cap = kDefaultTracySinghCap);

struct Theorem1Report {
  double lambda_n = 0.0;
  double n_min = 0.0;
  double C_bar_alpha = 0.0;
  double C_M_kappa = 0.0;
  double C_b1 = 0.0;
  double C_b2 = 0.0;
  double error_bound = 0.0;  // (C_b1 + C_b2) C0 sqrt(ln p / n)
  bool satisfied = false;
  std::string reason;
};

/// s is the support count entering the sample-size and lambda expressions.
Theorem1Report theorem1_conditions(const TheoryConstants& c, double s, Index p, double n);

struct ConvexityReport {
  double phi_product = 0.0;
  double threshold = 0.0;
  bool convex = false;
};

ConvexityReport theorem2_convexity(const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                                   const PenaltySpec& spec, double lambda_n);

struct RscReport {
  int trials = 0;
  int violations_full = 0;     // theta' G theta < (3/4) phi* |theta|^2
  int violations_support = 0;  // theta_S' G_SS theta_S < (63/64) phi* |theta_S|^2
  double min_ratio_full = 0.0;     // min over trials of theta' G theta / (phi* |theta|^2)
  double min_ratio_support = 0.0;
  double phi_min_star = 0.0;
  double n = 0.0;
  double N2 = 0.0;
  bool n_exceeds_N2 = false;
  double violation_rate() const { return trials == 0 ? 0.0 : double(violations_full + violations_support) / (2.0 * trials); }
};

RscReport rsc_check(const CovariancePair& cov_hat, const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                    const EdgeSet& support, int trials = 1000, std::uint64_t seed = 1, double tau = kDefaultTau,
                    Index cap = kDefaultTracySinghCap);

/// Largest block residual of 0 in grad L + d(penalty): nonzero blocks use the penalty's
/// derivative along the block direction, zero blocks max(0, ||grad block||_F - lambda).
double stationarity_gap(const BlockMatrix& delta_hat, const CovariancePair& cov, const PenaltySpec& spec);

/// Lower bound -(2 / (3 phi*)) ||b~||^2 - |c| on the D-trace loss expanded around delta_star.
double loss_floor(const CovariancePair& cov_hat, const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                  const BlockMatrix& delta_star, Index cap = kDefaultTracySinghCap);

}  // namespace diffgraph
