#pragma once

#include "blockmat.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace diffgraph {

enum class GraphKind { ErdosRenyi, BarabasiAlbert };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view name);

struct SynthParams {
  GraphKind kind = GraphKind::ErdosRenyi;
  Index p = 100;
  Index m = 4;
  double p_er = 0.5;          // edge probability of the ER base graph
  double p_er_delta = 0.05;   // edge probability of the differential graph
  bool conjunction_support = false;  // keep only differential edges that are also base-graph edges
  double pd_margin = 0.75;  // lasso F1 about 0.75 at n = 400 and 0.97 at n = 1600 with the defaults
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticModel {
  SynthParams params;
  EdgeSet graph;    // base graph of omega_x
  EdgeSet support;  // off-diagonal block support of delta_star
  BlockMatrix omega_x;
  BlockMatrix omega_y;
  BlockMatrix delta_star;
  double gamma = 0.0;

  BlockMatrix sigma_x() const;
  BlockMatrix sigma_y() const;
};

struct PdShift {
  BlockMatrix omega_x;
  BlockMatrix omega_y;
  double gamma = 0.0;
};

/// ER: each pair independently with probability p_er. BA: two connected seed nodes, then each
/// new node attaches one edge to an existing node chosen proportionally to degree.
EdgeSet gen_graph(GraphKind kind, Index p, double p_er, std::mt19937_64& rng);
EdgeSet gen_graph(GraphKind kind, Index p, double p_er, std::uint64_t seed);

/// Diagonal blocks 0.5^|s-t|; blocks of connected pairs have zero diagonal and off-diagonal
/// entries uniform on [-0.4,-0.1] u [0.1,0.4]; upper blocks mirrored to the lower triangle.
BlockMatrix gen_omega_x(const EdgeSet& graph, Index m, std::mt19937_64& rng);

struct DeltaDraw {
  BlockMatrix delta;
  EdgeSet support;
};

/// ER(p_er_delta) support over node pairs, optionally intersected with `restrict_to`;
/// support blocks filled with independent +-0.9 entries and mirrored.
DeltaDraw gen_delta(Index p, Index m, double p_er_delta, std::mt19937_64& rng, const EdgeSet* restrict_to = nullptr);

/// gamma = max(0, margin - min(phi_min(omega_x), phi_min(omega_y))), added to both.
PdShift make_pd(const BlockMatrix& omega_x, const BlockMatrix& omega_y, double margin = 0.1);

SyntheticModel generate_model(const SynthParams& params);

/// n draws of N(0, omega^{-1}) as rows, x = Phi w with Phi the Cholesky factor of omega^{-1}.
Eigen::MatrixXd sample_gaussian(const BlockMatrix& omega, Index n, std::uint64_t seed);

struct SamplePair {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

/// Draws x and y from independent streams derived from `seed`.
SamplePair sample(const SyntheticModel& model, Index n, std::uint64_t seed);

std::string model_to_json_text(const SyntheticModel& model);
SyntheticModel model_from_json_text(std::string_view text);

}  // namespace diffgraph
