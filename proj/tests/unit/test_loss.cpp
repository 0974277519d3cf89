#include "core/error.hpp"
#include "core/loss.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diffgraph;

namespace {

CovariancePair random_pair(oracle::Rng& rng, int m, int p) {
  return CovariancePair::make(BlockMatrix(oracle::random_spd(rng, m * p), m),
                              BlockMatrix(oracle::random_spd(rng, m * p), m), 100, 100);
}

}  // namespace

TEST(SampleCovariance, MatchesOuterProductAverage) {
  oracle::Rng rng(41);
  const Eigen::MatrixXd x = oracle::random_samples(rng, 37, 6);
  const BlockMatrix s = sample_covariance(x, 2);
  EXPECT_TRUE(s.dense().isApprox(x.transpose() * x / 37.0, 1e-13));
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  EXPECT_TRUE(sample_covariance(x, 3, true).dense().isApprox(c.transpose() * c / 37.0, 1e-13));
  EXPECT_EQ(s.dense(), s.dense().transpose());
  EXPECT_THROW(sample_covariance(x, 4), Error);
}

TEST(CovariancePair, ValidatesInputs) {
  oracle::Rng rng(42);
  const BlockMatrix good(oracle::random_spd(rng, 4), 2);
  Eigen::MatrixXd asym = good.dense();
  asym(0, 1) += 0.1;
  EXPECT_THROW(CovariancePair::make(BlockMatrix(asym, 2), good, 10, 10), Error);
  Eigen::MatrixXd indefinite = good.dense();
  indefinite -= 10.0 * Eigen::MatrixXd::Identity(4, 4);
  EXPECT_THROW(CovariancePair::make(BlockMatrix(indefinite, 2), good, 10, 10), Error);
  EXPECT_THROW(CovariancePair::make(good, BlockMatrix(oracle::random_spd(rng, 4), 1), 10, 10), Error);
  EXPECT_THROW(CovariancePair::make(good, good, 0, 10), Error);
  EXPECT_NO_THROW(CovariancePair::make(good, good, 10, 10));
}

TEST(DtraceLoss, MatchesKroneckerFormProperty) {
  oracle::Rng rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = rng.integer(1, 3), p = rng.integer(1, 5);
    const CovariancePair cov = random_pair(rng, m, p);
    const BlockMatrix d(oracle::random_matrix(rng, m * p, m * p), m);
    const double expect = oracle::dtrace_loss_kron(d.dense(), cov.sigma_x.dense(), cov.sigma_y.dense());
    EXPECT_NEAR(dtrace_loss(d, cov), expect, 1e-10 * (1 + std::abs(expect)));
  }
}

TEST(DtraceLoss, GradientMatchesCentralDifferencesProperty) {
  oracle::Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = rng.integer(1, 3), p = rng.integer(1, 5);
    const CovariancePair cov = random_pair(rng, m, p);
    const BlockMatrix d(oracle::random_matrix(rng, m * p, m * p), m);
    const Eigen::MatrixXd fd =
        oracle::central_difference_gradient(d.dense(), cov.sigma_x.dense(), cov.sigma_y.dense(), 1e-5);
    const Eigen::MatrixXd g = dtrace_gradient(d, cov).dense();
    EXPECT_LE((g - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()), 1e-7);
  }
}

TEST(DtraceLoss, PopulationMinimiserIsTheTrueDifference) {
  // With exact covariances the gradient vanishes at Omega_y - Omega_x.
  oracle::Rng rng(45);
  const Eigen::MatrixXd ox = oracle::random_spd(rng, 6, 0.5), oy = oracle::random_spd(rng, 6, 0.5);
  const CovariancePair cov = CovariancePair::make(BlockMatrix(ox.inverse(), 2), BlockMatrix(oy.inverse(), 2), 1, 1);
  const BlockMatrix g = dtrace_gradient(BlockMatrix(oy - ox, 2), cov);
  EXPECT_LE(g.dense().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DtraceLoss, ShapeMismatchIsRejected) {
  oracle::Rng rng(46);
  const CovariancePair cov = random_pair(rng, 2, 2);
  EXPECT_THROW(dtrace_loss(BlockMatrix::zeros(1, 4), cov), Error);
  EXPECT_THROW(dtrace_gradient(BlockMatrix::zeros(2, 3), cov), Error);
}

TEST(Eigenvalues, DenseAndPowerPathsAgreeWithReference) {
  oracle::Rng rng(47);
  for (int n : {5, 64, 65, 150}) {
    const Eigen::MatrixXd s = oracle::random_spd(rng, n, 0.05);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const double top = es.eigenvalues().maxCoeff();
    const double got = largest_eigenvalue(s);
    EXPECT_GE(got, top * (1 - 1e-8)) << n;
    EXPECT_LE(got, top * (1 + 1e-3)) << n;
    EXPECT_NEAR(smallest_eigenvalue(s), es.eigenvalues().minCoeff(), 1e-10 * top);
  }
  EXPECT_EQ(largest_eigenvalue(Eigen::MatrixXd::Zero(80, 80)), 0.0);
}

TEST(Lipschitz, ConstantsFollowTheirDefinitions) {
  const BlockMatrix sx(2.0 * Eigen::MatrixXd::Identity(4, 4), 2), sy(3.0 * Eigen::MatrixXd::Identity(4, 4), 2);
  const CovariancePair cov = CovariancePair::make(sx, sy, 5, 5);
  EXPECT_NEAR(lipschitz_lla(cov), 6.0, 1e-12);
  EXPECT_NEAR(lipschitz_redistributed(cov, PenaltySpec::lasso(0.1), 2), 6.0, 1e-12);
  EXPECT_NEAR(lipschitz_redistributed(cov, PenaltySpec::log_sum(0.1, 0.01), 2), 6.0 + 2 * 2 * 0.1 / 0.01, 1e-10);
  EXPECT_NEAR(lipschitz_redistributed(cov, PenaltySpec::scad(0.1, 3.0), 2), 6.0 + 2 * 2 / 2.0, 1e-12);
}

TEST(Lipschitz, BoundsTheGradientDifferenceProperty) {
  oracle::Rng rng(48);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = rng.integer(1, 3), p = rng.integer(1, 4);
    const CovariancePair cov = random_pair(rng, m, p);
    const BlockMatrix a(oracle::random_matrix(rng, m * p, m * p), m), b(oracle::random_matrix(rng, m * p, m * p), m);
    const double lhs = (dtrace_gradient(a, cov).dense() - dtrace_gradient(b, cov).dense()).norm();
    EXPECT_LE(lhs, lipschitz_lla(cov) * (a.dense() - b.dense()).norm() * (1 + 1e-12));
  }
}

TEST(Prox, MatchesNumericalMinimiserProperty) {
  oracle::Rng rng(49);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = rng.integer(1, 3);
    const Eigen::MatrixXd a = oracle::random_matrix(rng, m, m);
    const double w = rng.uniform(0.0, 2.0) * a.norm(), eta = rng.uniform(0.2, 1.5);
    const BlockMatrix out = prox_block_l2(BlockMatrix(a, m), Eigen::MatrixXd::Constant(1, 1, w), eta);
    const Eigen::MatrixXd ref = oracle::prox_block_numeric(a, w * eta);
    EXPECT_LE((out.dense() - ref).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Prox, ShrinksPerBlockWithItsOwnWeight) {
  BlockMatrix a = BlockMatrix::zeros(1, 2);
  a.dense() << 3, -4, 0.5, 2;
  Eigen::MatrixXd w(2, 2);
  w << 1, 0, 1, 5;
  const BlockMatrix out = prox_block_l2(a, w, 1.0);
  EXPECT_DOUBLE_EQ(out.dense()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(out.dense()(0, 1), -4.0);
  EXPECT_DOUBLE_EQ(out.dense()(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(out.dense()(1, 1), 0.0);
  EXPECT_THROW(prox_block_l2(a, w, 0.0), Error);
  EXPECT_THROW(prox_block_l2(a, -w, 1.0), Error);
  EXPECT_THROW(prox_block_l2(a, Eigen::MatrixXd::Ones(3, 3), 1.0), Error);
}

TEST(Objective, PenalizedAndLlaFormsAgreeForConstantWeights) {
  oracle::Rng rng(50);
  const CovariancePair cov = random_pair(rng, 2, 3);
  const BlockMatrix d(oracle::random_matrix(rng, 6, 6), 2);
  const double a = penalized_objective(d, cov, PenaltySpec::lasso(0.4));
  const double b = lla_objective(d, cov, Eigen::MatrixXd::Constant(3, 3, 0.4));
  EXPECT_NEAR(a, b, 1e-12 * (1 + std::abs(a)));
}
