#include "core/error.hpp"
#include "core/loss.hpp"
#include "core/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <queue>

using namespace diffgraph;

namespace {

bool connected(const EdgeSet& g) {
  const Index p = g.nodes();
  std::vector<std::vector<Index>> adj(p);
  for (const auto& [k, l] : g) {
    adj[k].push_back(l);
    adj[l].push_back(k);
  }
  std::vector<bool> seen(p, false);
  std::queue<Index> q;
  q.push(0);
  seen[0] = true;
  Index count = 1;
  while (!q.empty()) {
    const Index u = q.front();
    q.pop();
    for (Index v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
  }
  return count == p;
}

double min_eig(const Eigen::MatrixXd& a) { return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().minCoeff(); }

}  // namespace

TEST(Graph, ErdosRenyiEdgeCountIsBinomial) {
  const Index p = 60;
  const double q = 0.3;
  double total = 0.0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) total += double(gen_graph(GraphKind::ErdosRenyi, p, q, std::uint64_t(r + 1)).size());
  const double pairs = p * (p - 1) / 2.0;
  const double sd = std::sqrt(pairs * q * (1 - q) / reps);
  EXPECT_NEAR(total / reps, pairs * q, 5 * sd);
  EXPECT_EQ(gen_graph(GraphKind::ErdosRenyi, 10, 0.0, 1u).size(), 0u);
  EXPECT_EQ(gen_graph(GraphKind::ErdosRenyi, 10, 1.0, 1u).size(), 45u);
}

TEST(Graph, BarabasiAlbertIsASpanningTreeProperty) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Index p = 5 + Index(seed);
    const EdgeSet g = gen_graph(GraphKind::BarabasiAlbert, p, 0.5, seed);
    EXPECT_EQ(g.size(), std::size_t(p - 1));
    EXPECT_TRUE(connected(g));
  }
}

TEST(Graph, SameSeedSameGraph) {
  EXPECT_EQ(gen_graph(GraphKind::ErdosRenyi, 30, 0.2, 9u), gen_graph(GraphKind::ErdosRenyi, 30, 0.2, 9u));
  EXPECT_EQ(parse_graph_kind("ba"), GraphKind::BarabasiAlbert);
  EXPECT_THROW(parse_graph_kind("grid"), Error);
}

TEST(OmegaX, BlockStructure) {
  std::mt19937_64 rng(5);
  const EdgeSet g = gen_graph(GraphKind::ErdosRenyi, 8, 0.4, rng);
  const Index m = 3;
  const BlockMatrix w = gen_omega_x(g, m, rng);
  EXPECT_EQ(w.dense(), w.dense().transpose());
  for (Index k = 0; k < 8; ++k)
    for (Index l = 0; l < 8; ++l) {
      const auto blk = w.block(k, l);
      for (Index s = 0; s < m; ++s)
        for (Index t = 0; t < m; ++t) {
          if (k == l) {
            EXPECT_DOUBLE_EQ(blk(s, t), std::pow(0.5, std::abs(s - t)));
          } else if (!g.contains(k, l) || s == t) {
            EXPECT_EQ(blk(s, t), 0.0);
          } else {
            EXPECT_GE(std::abs(blk(s, t)), 0.1);
            EXPECT_LE(std::abs(blk(s, t)), 0.4);
          }
        }
    }
}

TEST(Delta, SupportBlocksAreSignedPointNine) {
  std::mt19937_64 rng(6);
  const DeltaDraw d = gen_delta(10, 2, 0.3, rng);
  EXPECT_EQ(d.delta.dense(), d.delta.dense().transpose());
  for (Index k = 0; k < 10; ++k)
    for (Index l = 0; l < 10; ++l) {
      const bool on = k != l && d.support.contains(k, l);
      const Eigen::MatrixXd blk = d.delta.block(k, l);
      if (on) {
        EXPECT_TRUE((blk.array().abs() == 0.9).all());
      } else {
        EXPECT_EQ(blk.norm(), 0.0);
      }
    }
  const EdgeSet only(10);
  const DeltaDraw none = gen_delta(10, 2, 1.0, rng, &only);
  EXPECT_TRUE(none.support.empty());
  EXPECT_THROW(gen_delta(10, 2, 1.5, rng), Error);
}

TEST(MakePd, ShiftReachesTheMargin) {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 2, 2, 1;  // eigenvalues -1, 3
  b << 2, 0, 0, 2;
  const PdShift s = make_pd(BlockMatrix(a, 1), BlockMatrix(b, 1), 0.25);
  EXPECT_NEAR(s.gamma, 1.25, 1e-12);
  EXPECT_NEAR(min_eig(s.omega_x.dense()), 0.25, 1e-12);
  const PdShift none = make_pd(BlockMatrix(b, 1), BlockMatrix(b, 1), 0.1);
  EXPECT_EQ(none.gamma, 0.0);
  EXPECT_EQ(none.omega_x.dense(), b);
}

TEST(Model, PrecisionsArePositiveDefiniteWithDifferenceDeltaProperty) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthParams sp;
    sp.p = 12;
    sp.m = 2;
    sp.p_er = 0.4;
    sp.p_er_delta = 0.2;
    sp.seed = seed;
    sp.kind = seed % 2 ? GraphKind::ErdosRenyi : GraphKind::BarabasiAlbert;
    sp.conjunction_support = seed % 3 == 0;
    const SyntheticModel mdl = generate_model(sp);
    EXPECT_GT(min_eig(mdl.omega_x.dense()), 0.0);
    EXPECT_GT(min_eig(mdl.omega_y.dense()), 0.0);
    EXPECT_LE((mdl.omega_y.dense() - mdl.omega_x.dense() - mdl.delta_star.dense()).cwiseAbs().maxCoeff(), 1e-12);
    if (mdl.gamma > 0.0)
      EXPECT_NEAR(std::min(min_eig(mdl.omega_x.dense()), min_eig(mdl.omega_y.dense())), sp.pd_margin, 1e-9);
    if (sp.conjunction_support)
      for (const auto& [k, l] : mdl.support) EXPECT_TRUE(mdl.graph.contains(k, l));
  }
}

TEST(Model, ValidationRejectsNonsense) {
  SynthParams sp;
  sp.p = 1;
  EXPECT_THROW(generate_model(sp), Error);
  sp = SynthParams{};
  sp.m = 0;
  EXPECT_THROW(generate_model(sp), Error);
  sp = SynthParams{};
  sp.p_er = -0.1;
  EXPECT_THROW(generate_model(sp), Error);
}

TEST(Sampling, EmpiricalCovarianceApproachesTheInverse) {
  SynthParams sp;
  sp.p = 4;
  sp.m = 2;
  sp.p_er_delta = 0.5;
  const SyntheticModel mdl = generate_model(sp);
  const Eigen::MatrixXd x = sample_gaussian(mdl.omega_x, 40000, 11);
  const Eigen::MatrixXd emp = x.transpose() * x / double(x.rows());
  const Eigen::MatrixXd truth = mdl.omega_x.dense().inverse();
  EXPECT_LE((emp - truth).cwiseAbs().maxCoeff(), 0.05 * truth.cwiseAbs().maxCoeff());
  EXPECT_EQ(sample_gaussian(mdl.omega_x, 5, 3), sample_gaussian(mdl.omega_x, 5, 3));
  EXPECT_NE(sample_gaussian(mdl.omega_x, 5, 3), sample_gaussian(mdl.omega_x, 5, 4));
  const SamplePair s = sample(mdl, 7, 2);
  EXPECT_EQ(s.x.rows(), 7);
  EXPECT_NE(s.x, s.y);
  EXPECT_THROW(sample_gaussian(mdl.omega_x, 0, 1), Error);
}

TEST(ModelJson, RoundTripPreservesEverything) {
  SynthParams sp;
  sp.p = 6;
  sp.m = 2;
  sp.seed = 42;
  sp.kind = GraphKind::BarabasiAlbert;
  sp.p_er_delta = 0.4;
  const SyntheticModel a = generate_model(sp);
  const SyntheticModel b = model_from_json_text(model_to_json_text(a));
  EXPECT_EQ(b.omega_x.dense(), a.omega_x.dense());
  EXPECT_EQ(b.omega_y.dense(), a.omega_y.dense());
  EXPECT_EQ(b.delta_star.dense(), a.delta_star.dense());
  EXPECT_EQ(b.support, a.support);
  EXPECT_EQ(b.graph, a.graph);
  EXPECT_EQ(b.gamma, a.gamma);
  EXPECT_EQ(b.params.kind, GraphKind::BarabasiAlbert);
  EXPECT_EQ(b.params.seed, 42u);
  EXPECT_THROW(model_from_json_text("{\"p\":3}"), Error);
}
