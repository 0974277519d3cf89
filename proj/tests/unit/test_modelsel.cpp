#include "core/error.hpp"
#include "core/modelsel.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diffgraph;

namespace {

CovariancePair sampled_pair(oracle::Rng& rng, int m, int p, int n, double scale = 1.0) {
  Eigen::MatrixXd x = oracle::random_samples(rng, n, m * p);
  Eigen::MatrixXd y = oracle::random_samples(rng, n, m * p);
  for (int j = 0; j < m * p; ++j) {
    const double s = scale * (1.0 + j);
    x.col(j) *= s;
    y.col(j) *= s;
  }
  return CovariancePair::make(sample_covariance(x, m), sample_covariance(y, m), std::size_t(n), std::size_t(n));
}

double bic_oracle(const Eigen::MatrixXd& d, const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sy, double n) {
  double fit = 0.0;
  const Eigen::MatrixXd r = sx * d * sy - sx + sy;
  for (Eigen::Index i = 0; i < r.size(); ++i) fit += r.data()[i] * r.data()[i];
  int nz = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) nz += d.data()[i] != 0.0;
  return n * std::sqrt(fit) + std::log(n) * nz;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no diffgraph::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Bic, MatchesDirectFormulaProperty) {
  oracle::Rng rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = rng.integer(1, 3), p = rng.integer(1, 4);
    const CovariancePair cov = sampled_pair(rng, m, p, 20 + trial);
    const BlockMatrix d(oracle::random_sparse_blocks(rng, m, p, 0.5), m);
    const double want = bic_oracle(d.dense(), cov.sigma_x.dense(), cov.sigma_y.dense(), 2.0 * (20 + trial));
    EXPECT_NEAR(bic(d, cov), want, 1e-10 * std::abs(want));
  }
}

TEST(Bic, RescalingIsACongruenceByTheDiagonal) {
  oracle::Rng rng(82);
  const CovariancePair cov = sampled_pair(rng, 2, 3, 40, 3.0);
  const BlockMatrix d(oracle::random_matrix(rng, 6, 6), 2);
  const auto [scaled, sd] = rescale_for_bic(cov, d);
  const Eigen::VectorXd v = cov.sigma_x.dense().diagonal().cwiseSqrt().cwiseInverse();
  EXPECT_TRUE(scaled.sigma_x.dense().isApprox(v.asDiagonal() * cov.sigma_x.dense() * v.asDiagonal()));
  EXPECT_TRUE(scaled.sigma_y.dense().isApprox(v.asDiagonal() * cov.sigma_y.dense() * v.asDiagonal()));
  EXPECT_TRUE(sd.dense().isApprox(v.cwiseInverse().asDiagonal() * d.dense() * v.cwiseInverse().asDiagonal()));
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(scaled.sigma_x.dense()(i, i), 1.0, 1e-12);
  // the fitted residual is rescaled, not changed in kind: zero pattern of D survives
  EXPECT_EQ((sd.dense().array() != 0.0).count(), (d.dense().array() != 0.0).count());
}

TEST(Grid, SyntheticAndRealEndpoints) {
  const LambdaGrid s = make_grid(2.0, GridMode::Synthetic, 20);
  EXPECT_DOUBLE_EQ(s.lambda_upper, 1.0);
  EXPECT_DOUBLE_EQ(s.lambda_lower, 0.1);
  ASSERT_EQ(s.points.size(), 20u);
  EXPECT_DOUBLE_EQ(s.points.front(), 0.1);
  EXPECT_DOUBLE_EQ(s.points.back(), 1.0);
  for (std::size_t i = 2; i < s.points.size(); ++i)
    EXPECT_NEAR(s.points[i] / s.points[i - 1], s.points[1] / s.points[0], 1e-12);

  const LambdaGrid r = make_grid(2.0, GridMode::Real, 5);
  EXPECT_DOUBLE_EQ(r.lambda_upper, 2.0);
  EXPECT_DOUBLE_EQ(r.lambda_lower, 0.4);
  EXPECT_EQ(make_grid(2.0, GridMode::Real, 1).points, std::vector<double>{2.0});
  EXPECT_THROW(make_grid(0.0, GridMode::Real, 5), Error);
  EXPECT_THROW(make_grid(1.0, GridMode::Real, 0), Error);
}

TEST(LambdaSm, EmptyAtThresholdAndEdgesJustBelowProperty) {
  oracle::Rng rng(83);
  for (int trial = 0; trial < 8; ++trial) {
    const int m = rng.integer(1, 2), p = rng.integer(3, 5);
    const CovariancePair cov = sampled_pair(rng, m, p, 40);
    GridOptions opt;
    opt.seed_lambda = rng.uniform(0.01, 10.0);
    SolverConfig c;
    c.delta_tol = 1e-8;
    c.i_max = 5000;
    int calls = 0;
    const PenaltySpec spec = PenaltySpec::lasso(1.0);
    const double sm = find_lambda_sm(cov, spec, c, opt, &calls);
    EXPECT_GT(calls, 0);
    EXPECT_LE(calls, opt.max_solver_calls);
    EXPECT_TRUE(estimate(cov, spec.with_lambda(sm), c).edge_set.empty());
    EXPECT_FALSE(estimate(cov, spec.with_lambda(sm * (1 - 2 * opt.rel_precision)), c).edge_set.empty());
  }
}

TEST(LambdaSm, IdenticalCovariancesHitTheFloor) {
  oracle::Rng rng(84);
  const BlockMatrix s(oracle::random_spd(rng, 6), 2);
  const CovariancePair cov = CovariancePair::make(s, s, 10, 10);
  GridOptions opt;
  EXPECT_DOUBLE_EQ(find_lambda_sm(cov, PenaltySpec::lasso(1.0), SolverConfig{}, opt), opt.lambda_floor);
}

TEST(LambdaSm, SolverCallBudgetIsEnforced) {
  oracle::Rng rng(85);
  const CovariancePair cov = sampled_pair(rng, 1, 4, 30);
  GridOptions opt;
  opt.max_solver_calls = 2;
  opt.seed_lambda = 1e-4;  // far below the threshold, so two calls cannot bracket it
  EXPECT_EQ(code_of([&] { find_lambda_sm(cov, PenaltySpec::lasso(1.0), SolverConfig{}, opt); }),
            ErrorCode::SearchFailed);
  opt = GridOptions{};
  opt.rel_precision = 0.0;
  EXPECT_THROW(opt.validate(), Error);
}

TEST(Select, CurveCoversGridAndPicksMinimum) {
  oracle::Rng rng(86);
  const CovariancePair cov = sampled_pair(rng, 2, 4, 60);
  const LambdaGrid grid = build_grid(cov, PenaltySpec::lasso(1.0), SolverConfig{});
  std::vector<double> seen;
  const Selection sel = select(cov, PenaltySpec::lasso(1.0), SolverConfig{}, grid,
                               [&](std::size_t, double lambda, const EstimationResult&) { seen.push_back(lambda); });
  EXPECT_EQ(seen, grid.points);
  ASSERT_EQ(sel.curve.size(), grid.points.size());
  for (const auto& pt : sel.curve) EXPECT_GE(pt.bic, sel.curve[sel.index].bic);
  EXPECT_DOUBLE_EQ(sel.lambda_star, grid.points[sel.index]);
  EXPECT_EQ(sel.result.edge_set.size(), sel.curve[sel.index].edges);
}

TEST(Select, TiesGoToTheLargerLambda) {
  oracle::Rng rng(87);
  const BlockMatrix s(oracle::random_spd(rng, 4), 2);
  const CovariancePair cov = CovariancePair::make(s, s, 10, 10);
  LambdaGrid grid;
  grid.points = {0.1, 0.2, 0.4};
  const Selection sel = select(cov, PenaltySpec::lasso(1.0), SolverConfig{}, grid);
  EXPECT_EQ(sel.index, 2u);
  EXPECT_DOUBLE_EQ(sel.lambda_star, 0.4);
}

TEST(Select, StandardizedEstimateMapsBackToFeatureScale) {
  oracle::Rng rng(88);
  const CovariancePair cov = sampled_pair(rng, 2, 3, 80, 2.5);
  GridOptions opt;
  opt.mode = GridMode::Real;
  opt.grid_size = 6;
  const StandardizedSelection out = select_standardized(cov, PenaltySpec::lasso(1.0), SolverConfig{}, opt);
  const auto [scaled, v] = standardize(cov);
  const EstimationResult direct = estimate(scaled, PenaltySpec::lasso(out.selection.lambda_star), SolverConfig{});
  const Eigen::MatrixXd back = v.asDiagonal() * direct.delta_hat.dense() * v.asDiagonal();
  EXPECT_TRUE(out.selection.result.delta_hat.dense().isApprox(back, 1e-12));
  EXPECT_TRUE(out.scale.isApprox(v));
  EXPECT_EQ(out.grid.points.size(), 6u);
}

TEST(Select, ArgminIgnoresFeatureRescalingProperty) {
  oracle::Rng rng(89);
  for (int trial = 0; trial < 6; ++trial) {
    const int m = rng.integer(1, 2), p = rng.integer(3, 5), n = 120;
    const Eigen::MatrixXd x = oracle::random_samples(rng, n, m * p);
    const Eigen::MatrixXd y = oracle::random_samples(rng, n, m * p);
    Eigen::VectorXd d(m * p);
    for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = rng.uniform(0.2, 5.0);
    const auto pair_of = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
      return CovariancePair::make(sample_covariance(a, m), sample_covariance(b, m), std::size_t(n), std::size_t(n));
    };
    GridOptions opt;
    opt.grid_size = 8;
    const PenaltySpec s = PenaltySpec::log_sum(1.0);
    const auto plain = select_standardized(pair_of(x, y), s, SolverConfig{}, opt);
    const auto scaled = select_standardized(pair_of(x * d.asDiagonal(), y * d.asDiagonal()), s, SolverConfig{}, opt);
    EXPECT_EQ(plain.selection.index, scaled.selection.index) << "trial " << trial;
    EXPECT_EQ(plain.selection.result.edge_set, scaled.selection.result.edge_set) << "trial " << trial;
  }
}
