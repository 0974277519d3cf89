#include "core/blockmat.hpp"
#include "core/error.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace diffgraph;

TEST(BlockMatrix, RejectsNonSquareAndBadBlockSize) {
  EXPECT_THROW(BlockMatrix(Eigen::MatrixXd::Zero(4, 6), 2), Error);
  EXPECT_THROW(BlockMatrix(Eigen::MatrixXd::Zero(6, 6), 4), Error);
  EXPECT_THROW(BlockMatrix(Eigen::MatrixXd::Zero(6, 6), 0), Error);
  const BlockMatrix a(Eigen::MatrixXd::Zero(6, 6), 3);
  EXPECT_EQ(a.nodes(), 2);
  EXPECT_EQ(a.side(), 6);
}

TEST(BlockMatrix, BlockViewsAddressTheRightEntries) {
  Eigen::MatrixXd d(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d(i, j) = 10 * i + j;
  const BlockMatrix a(d, 2);
  EXPECT_EQ(a.block(1, 0)(0, 0), 20);
  EXPECT_EQ(a.block(0, 1)(1, 1), 13);
  EXPECT_NEAR(a.block_norm(1, 1), std::sqrt(22.0 * 22 + 23 * 23 + 32 * 32 + 33 * 33), 1e-12);
}

TEST(BlockMatrix, BvecOrderIsColumnBlockMajor) {
  // m = 1 reduces bvec to the ordinary column-stacking vec.
  oracle::Rng rng(3);
  const Eigen::MatrixXd d = oracle::random_matrix(rng, 4, 4);
  EXPECT_TRUE(bvec(BlockMatrix(d, 1)).isApprox(oracle::vec(d)));
  EXPECT_EQ(bvec_block_index(2, 1, 5), 7);
}

TEST(BlockMatrix, BvecRoundTripProperty) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = rng.integer(1, 4), p = rng.integer(1, 5);
    const BlockMatrix a(oracle::random_matrix(rng, m * p, m * p), m);
    const BlockMatrix back = bvec_inverse(bvec(a), m, p);
    EXPECT_EQ(back.dense(), a.dense());
  }
}

TEST(BlockMatrix, BvecBlockSegmentsHoldVecOfEachBlock) {
  oracle::Rng rng(12);
  const int m = 3, p = 4;
  const BlockMatrix a(oracle::random_matrix(rng, m * p, m * p), m);
  const Eigen::VectorXd v = bvec(a);
  for (int k = 0; k < p; ++k)
    for (int l = 0; l < p; ++l) {
      const Eigen::VectorXd seg = v.segment(bvec_block_index(k, l, p) * m * m, m * m);
      EXPECT_TRUE(seg.isApprox(oracle::vec(a.block(k, l))));
    }
}

TEST(TracySingh, ReducesToKroneckerForUnitBlocks) {
  oracle::Rng rng(5);
  const Eigen::MatrixXd a = oracle::random_matrix(rng, 3, 3), b = oracle::random_matrix(rng, 3, 3);
  const Eigen::MatrixXd ts = tracy_singh(BlockMatrix(a, 1), BlockMatrix(b, 1));
  EXPECT_TRUE(ts.isApprox(oracle::kron(a, b), 1e-14));
}

TEST(TracySingh, HessianIdentityProperty) {
  // bvec(Sx D Sy) = (Sy tracy-singh Sx) bvec(D) for symmetric Sx, Sy.
  oracle::Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = rng.integer(1, 3), p = rng.integer(2, 4);
    const BlockMatrix sx(oracle::random_spd(rng, m * p), m), sy(oracle::random_spd(rng, m * p), m);
    const BlockMatrix d(oracle::random_matrix(rng, m * p, m * p), m);
    const Eigen::VectorXd lhs = bvec(BlockMatrix(sx.dense() * d.dense() * sy.dense(), m));
    const Eigen::VectorXd rhs = tracy_singh(sy, sx) * bvec(d);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + lhs.cwiseAbs().maxCoeff()));
  }
}

TEST(TracySingh, BlockDefinitionMatchesKroneckerOfBlocks) {
  oracle::Rng rng(19);
  const int m = 2, p = 3;
  const BlockMatrix a(oracle::random_matrix(rng, m * p, m * p), m), b(oracle::random_matrix(rng, m * p, m * p), m);
  const Eigen::MatrixXd ts = tracy_singh(a, b);
  const int cell = m * m;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k)
        for (int l = 0; l < p; ++l) {
          const Eigen::MatrixXd expect = oracle::kron(a.block(i, j), b.block(k, l));
          const Eigen::MatrixXd got = ts.block((i * p + k) * cell, (j * p + l) * cell, cell, cell);
          EXPECT_TRUE(got.isApprox(expect, 1e-14));
        }
}

TEST(TracySingh, CapIsEnforced) {
  const BlockMatrix a = BlockMatrix::identity(4, 20);
  EXPECT_THROW(
      {
        try {
          tracy_singh(a, a);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::CapExceeded);
          throw;
        }
      },
      Error);
  EXPECT_NO_THROW(tracy_singh(BlockMatrix::identity(2, 4), BlockMatrix::identity(2, 4)));
}

TEST(Symmetrize, IsIdempotentAndSymmetric) {
  oracle::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = rng.integer(1, 3), p = rng.integer(1, 5);
    const BlockMatrix a(oracle::random_matrix(rng, m * p, m * p), m);
    const BlockMatrix s = symmetrize(a);
    EXPECT_TRUE(s.dense().isApprox(s.dense().transpose()));
    EXPECT_EQ(symmetrize(s).dense(), s.dense());
  }
}

TEST(EdgeSet, CanonicalisesAndRejectsBadEdges) {
  EdgeSet e(4);
  e.insert(3, 1);
  e.insert(1, 3);
  EXPECT_EQ(e.size(), 1u);
  EXPECT_TRUE(e.contains(1, 3));
  EXPECT_TRUE(e.contains(3, 1));
  EXPECT_THROW(e.insert(2, 2), Error);
  EXPECT_THROW(e.insert(0, 4), Error);
  EdgeSet loops(3, true);
  EXPECT_NO_THROW(loops.insert(1, 1));
}

TEST(EdgesFrom, UsesEitherOrientationAndThreshold) {
  BlockMatrix a = BlockMatrix::zeros(2, 3);
  a.block(2, 0)(0, 1) = 0.5;
  a.block(0, 0)(0, 0) = 9.0;  // diagonal blocks never form edges
  EdgeSet e = edges_from(a);
  EXPECT_EQ(e.size(), 1u);
  EXPECT_TRUE(e.contains(0, 2));
  EXPECT_TRUE(edges_from(a, 0.5).empty());
  EXPECT_THROW(edges_from(a, -1.0), Error);
}
