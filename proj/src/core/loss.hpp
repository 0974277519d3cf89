#pragma once

#include "blockmat.hpp"
#include "penalty.hpp"

#include <cstddef>

namespace diffgraph {

/// Pair of sample covariances with their sample counts.
struct CovariancePair {
  BlockMatrix sigma_x;
  BlockMatrix sigma_y;
  std::size_t n_x = 0;
  std::size_t n_y = 0;

  /// Validates shape, symmetry (1e-10 relative) and positive semidefiniteness (eigenvalues >= -1e-10).
  static CovariancePair make(BlockMatrix sigma_x, BlockMatrix sigma_y, std::size_t n_x, std::size_t n_y);

  Index block_size() const noexcept { return sigma_x.block_size(); }
  Index nodes() const noexcept { return sigma_x.nodes(); }
  Eigen::MatrixXd difference() const { return sigma_x.dense() - sigma_y.dense(); }
};

/// (1/n) sum_t x(t) x(t)^T; optionally after removing column means.
BlockMatrix sample_covariance(const Eigen::MatrixXd& samples, Index block_size, bool center = false);

double dtrace_loss(const BlockMatrix& delta, const CovariancePair& cov);
BlockMatrix dtrace_gradient(const BlockMatrix& delta, const CovariancePair& cov);

/// Loss and gradient sharing the product sigma_x * delta * sigma_y.
struct LossAndGradient {
  double loss = 0.0;
  Eigen::MatrixXd gradient;
};
LossAndGradient dtrace_loss_and_gradient(const Eigen::MatrixXd& delta, const CovariancePair& cov);

/// Largest eigenvalue of a symmetric matrix: dense solve for side <= 64, power iteration otherwise.
double largest_eigenvalue(const Eigen::MatrixXd& sym);
double smallest_eigenvalue(const Eigen::MatrixXd& sym);

double lipschitz_lla(const CovariancePair& cov);
double lipschitz_redistributed(const CovariancePair& cov, const PenaltySpec& spec, Index block_size);

/// Block soft-threshold: block (k,l) scaled by (1 - w_kl * eta / ||A^(kl)||_F)_+.
BlockMatrix prox_block_l2(const BlockMatrix& a, const Eigen::MatrixXd& weights, double eta);
void prox_block_l2_inplace(Eigen::MatrixXd& a, Index block_size, const Eigen::MatrixXd& weights, double eta);
void prox_block_l2_inplace(Eigen::MatrixXd& a, Index block_size, double weight, double eta);

double penalized_objective(const BlockMatrix& delta, const CovariancePair& cov, const PenaltySpec& spec);

/// L(delta) + sum_kl w_kl ||delta^(kl)||_F.
double lla_objective(const BlockMatrix& delta, const CovariancePair& cov, const Eigen::MatrixXd& weights);

}  // namespace diffgraph
