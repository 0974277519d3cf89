#include "core/error.hpp"
#include "core/metrics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace diffgraph;

namespace {

EdgeSet random_edges(oracle::Rng& rng, Index p, double density) {
  EdgeSet e(p);
  for (Index k = 0; k < p; ++k)
    for (Index l = k + 1; l < p; ++l)
      if (rng.coin(density)) e.insert(k, l);
  return e;
}

}  // namespace

TEST(CompareEdges, CountsAgreeWithSetAlgebraProperty) {
  oracle::Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    const Index p = rng.integer(2, 12);
    const EdgeSet a = random_edges(rng, p, rng.uniform(0.0, 0.6));
    const EdgeSet b = random_edges(rng, p, rng.uniform(0.0, 0.6));
    std::size_t tp = 0, fp = 0, fn = 0;
    for (Index k = 0; k < p; ++k)
      for (Index l = k + 1; l < p; ++l) {
        const bool in_a = a.contains(k, l), in_b = b.contains(k, l);
        tp += in_a && in_b;
        fp += in_a && !in_b;
        fn += !in_a && in_b;
      }
    const EvalReport r = compare_edges(a, b);
    EXPECT_EQ(r.tp, tp);
    EXPECT_EQ(r.fp, fp);
    EXPECT_EQ(r.fn, fn);
    EXPECT_EQ(r.hamming, fp + fn);
    EXPECT_EQ(r.support_recovered, fp + fn == 0);
    const double f1 = tp + fp + fn == 0 ? 1.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    EXPECT_DOUBLE_EQ(r.f1, f1);
  }
}

TEST(CompareEdges, EmptySetsAndMismatchedSizes) {
  EXPECT_EQ(compare_edges(EdgeSet(4), EdgeSet(4)).f1, 1.0);
  EdgeSet t(4);
  t.insert(0, 1);
  EXPECT_EQ(compare_edges(EdgeSet(4), t).f1, 0.0);
  EXPECT_THROW(compare_edges(EdgeSet(4), EdgeSet(5)), Error);
}

TEST(Evaluate, RelativeFrobeniusError) {
  BlockMatrix truth = BlockMatrix::zeros(1, 2);
  truth.dense() << 0, 2, 2, 0;
  BlockMatrix est = BlockMatrix::zeros(1, 2);
  est.dense() << 0, 1, 1, 0;
  EdgeSet e(2);
  e.insert(0, 1);
  const EvalReport r = evaluate(est, e, truth, e);
  EXPECT_NEAR(r.frob_error, 0.5, 1e-15);
  EXPECT_TRUE(r.support_recovered);
  const EvalReport z = evaluate(est, e, BlockMatrix::zeros(1, 2), EdgeSet(2));
  EXPECT_NEAR(z.frob_error, std::sqrt(2.0), 1e-15);
  EXPECT_THROW(evaluate(est, e, BlockMatrix::zeros(1, 3), EdgeSet(3)), Error);
}

TEST(MeanSd, PopulationStandardDeviation) {
  const MeanSd a = mean_sd({2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(a.mean, 5.0);
  EXPECT_DOUBLE_EQ(a.sd, 2.0);
  EXPECT_EQ(mean_sd({3.0}).sd, 0.0);
  EXPECT_THROW(mean_sd({}), Error);
}

TEST(Aggregate, AveragesEachMetric) {
  EvalReport a, b;
  a.f1 = 1.0;
  a.hamming = 0;
  a.support_recovered = true;
  a.frob_error = 0.2;
  b.f1 = 0.5;
  b.hamming = 4;
  b.frob_error = 0.4;
  const Summary s = aggregate({a, b});
  EXPECT_EQ(s.runs, 2u);
  EXPECT_DOUBLE_EQ(s.f1.mean, 0.75);
  EXPECT_DOUBLE_EQ(s.f1.sd, 0.25);
  EXPECT_DOUBLE_EQ(s.hamming.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.support_recovered.mean, 0.5);
  EXPECT_NEAR(s.frob_error.mean, 0.3, 1e-15);
  EXPECT_THROW(aggregate({}), Error);
}
