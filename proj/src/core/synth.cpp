#include "synth.hpp"

#include "error.hpp"
#include "loss.hpp"

#include <json.hpp>

#include <cmath>
#include <vector>

namespace diffgraph {
namespace {

using nlohmann::json;

constexpr double kDeltaMagnitude = 0.9;
constexpr double kPdTolerance = 1e-8;

BlockMatrix inverse_pd(const BlockMatrix& omega) {
  Eigen::LLT<Eigen::MatrixXd> llt(omega.dense());
  require(llt.info() == Eigen::Success, ErrorCode::Numerical, "precision matrix is not positive definite");
  const Index side = omega.side();
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(side, side));
  inv = 0.5 * (inv + inv.transpose()).eval();
  return BlockMatrix(std::move(inv), omega.block_size());
}

json edges_to_json(const EdgeSet& edges) {
  json out = json::array();
  for (const auto& [k, l] : edges) out.push_back({k, l});
  return out;
}

EdgeSet edges_from_json(const json& j, Index p) {
  EdgeSet out(p);
  for (const auto& e : j) out.insert(e.at(0).get<Index>(), e.at(1).get<Index>());
  return out;
}

json block_to_json(const BlockMatrix& a) {
  json data = json::array();
  for (Index i = 0; i < a.side(); ++i)
    for (Index j = 0; j < a.side(); ++j) data.push_back(a.dense()(i, j));
  return {{"m", a.block_size()}, {"p", a.nodes()}, {"data", std::move(data)}};
}

BlockMatrix block_from_json(const json& j) {
  const Index m = j.at("m").get<Index>();
  const Index p = j.at("p").get<Index>();
  const auto& data = j.at("data");
  require(m > 0 && p > 0, ErrorCode::Parse, "matrix envelope needs positive m and p");
  require(data.size() == static_cast<std::size_t>(m * p * m * p), ErrorCode::Parse, "matrix envelope has wrong data length");
  Eigen::MatrixXd a(m * p, m * p);
  std::size_t idx = 0;
  for (Index i = 0; i < m * p; ++i)
    for (Index k = 0; k < m * p; ++k) a(i, k) = data[idx++].get<double>();
  return BlockMatrix(std::move(a), m);
}

}  // namespace

std::string_view to_string(GraphKind kind) {
  return kind == GraphKind::ErdosRenyi ? "er" : "ba";
}

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "er" || name == "ER") return GraphKind::ErdosRenyi;
  if (name == "ba" || name == "BA") return GraphKind::BarabasiAlbert;
  fail(ErrorCode::InvalidArgument, "unknown graph kind '" + std::string(name) + "' (expected er|ba)");
}

void SynthParams::validate() const {
  require(p >= 2, ErrorCode::InvalidArgument, "p must be at least 2");
  require(m >= 1, ErrorCode::InvalidArgument, "m must be at least 1");
  require(p_er >= 0.0 && p_er <= 1.0, ErrorCode::InvalidArgument, "p_er must be in [0,1]");
  require(p_er_delta >= 0.0 && p_er_delta <= 1.0, ErrorCode::InvalidArgument, "p_er_delta must be in [0,1]");
  require(pd_margin > 0.0 && std::isfinite(pd_margin), ErrorCode::InvalidArgument, "pd_margin must be positive");
}

BlockMatrix SyntheticModel::sigma_x() const { return inverse_pd(omega_x); }
BlockMatrix SyntheticModel::sigma_y() const { return inverse_pd(omega_y); }

EdgeSet gen_graph(GraphKind kind, Index p, double p_er, std::mt19937_64& rng) {
  require(p >= 2, ErrorCode::InvalidArgument, "graph needs at least 2 nodes");
  EdgeSet g(p);
  if (kind == GraphKind::ErdosRenyi) {
    require(p_er >= 0.0 && p_er <= 1.0, ErrorCode::InvalidArgument, "p_er must be in [0,1]");
    std::bernoulli_distribution coin(p_er);
    for (Index k = 0; k < p; ++k)
      for (Index l = k + 1; l < p; ++l)
        if (coin(rng)) g.insert(k, l);
    return g;
  }
  // Each edge contributes both endpoints, so a uniform pick from this list is degree-proportional.
  std::vector<Index> endpoints = {0, 1};
  g.insert(0, 1);
  for (Index v = 2; v < p; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
    const Index target = endpoints[pick(rng)];
    g.insert(v, target);
    endpoints.push_back(v);
    endpoints.push_back(target);
  }
  return g;
}

EdgeSet gen_graph(GraphKind kind, Index p, double p_er, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gen_graph(kind, p, p_er, rng);
}

BlockMatrix gen_omega_x(const EdgeSet& graph, Index m, std::mt19937_64& rng) {
  require(m >= 1, ErrorCode::InvalidArgument, "m must be at least 1");
  const Index p = graph.nodes();
  BlockMatrix omega = BlockMatrix::zeros(m, p);
  for (Index k = 0; k < p; ++k)
    for (Index s = 0; s < m; ++s)
      for (Index t = 0; t < m; ++t) omega.block(k, k)(s, t) = std::pow(0.5, static_cast<double>(std::abs(s - t)));

  std::uniform_real_distribution<double> magnitude(0.1, 0.4);
  std::bernoulli_distribution sign(0.5);
  for (const auto& [k, l] : graph) {
    auto blk = omega.block(k, l);
    for (Index s = 0; s < m; ++s)
      for (Index t = 0; t < m; ++t) {
        if (s == t) continue;
        const double v = magnitude(rng);
        blk(s, t) = sign(rng) ? v : -v;
      }
    omega.block(l, k) = blk.transpose();
  }
  return omega;
}

DeltaDraw gen_delta(Index p, Index m, double p_er_delta, std::mt19937_64& rng, const EdgeSet* restrict_to) {
  require(p_er_delta >= 0.0 && p_er_delta <= 1.0, ErrorCode::InvalidArgument, "p_er_delta must be in [0,1]");
  DeltaDraw out{BlockMatrix::zeros(m, p), EdgeSet(p)};
  const EdgeSet draw = gen_graph(GraphKind::ErdosRenyi, p, p_er_delta, rng);
  std::bernoulli_distribution sign(0.5);
  for (const auto& [k, l] : draw) {
    if (restrict_to && !restrict_to->contains(k, l)) continue;
    out.support.insert(k, l);
    auto blk = out.delta.block(k, l);
    for (Index s = 0; s < m; ++s)
      for (Index t = 0; t < m; ++t) blk(s, t) = sign(rng) ? kDeltaMagnitude : -kDeltaMagnitude;
    out.delta.block(l, k) = blk.transpose();
  }
  return out;
}

PdShift make_pd(const BlockMatrix& omega_x, const BlockMatrix& omega_y, double margin) {
  require(omega_x.same_layout(omega_y), ErrorCode::ShapeMismatch, "make_pd: layouts differ");
  const double lo = std::min(smallest_eigenvalue(omega_x.dense()), smallest_eigenvalue(omega_y.dense()));
  require(std::isfinite(lo), ErrorCode::Numerical, "make_pd: eigenvalue computation failed");
  PdShift out{omega_x, omega_y, std::max(0.0, margin - lo)};
  if (out.gamma > 0.0) {
    out.omega_x.dense().diagonal().array() += out.gamma;
    out.omega_y.dense().diagonal().array() += out.gamma;
  }
  return out;
}

SyntheticModel generate_model(const SynthParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  SyntheticModel model;
  model.params = params;
  model.graph = gen_graph(params.kind, params.p, params.p_er, rng);
  const BlockMatrix omega_x = gen_omega_x(model.graph, params.m, rng);
  DeltaDraw d = gen_delta(params.p, params.m, params.p_er_delta, rng,
                          params.conjunction_support ? &model.graph : nullptr);
  const BlockMatrix omega_y(omega_x.dense() + d.delta.dense(), params.m);
  PdShift shifted = make_pd(omega_x, omega_y, params.pd_margin);
  require(smallest_eigenvalue(shifted.omega_x.dense()) > kPdTolerance &&
              smallest_eigenvalue(shifted.omega_y.dense()) > kPdTolerance,
          ErrorCode::Numerical, "generated precision matrices are not positive definite");
  model.omega_x = std::move(shifted.omega_x);
  model.omega_y = std::move(shifted.omega_y);
  model.gamma = shifted.gamma;
  model.delta_star = std::move(d.delta);
  model.support = std::move(d.support);
  return model;
}

Eigen::MatrixXd sample_gaussian(const BlockMatrix& omega, Index n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidArgument, "sample size must be positive");
  const BlockMatrix sigma = inverse_pd(omega);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.dense());
  require(llt.info() == Eigen::Success, ErrorCode::Numerical, "covariance factorization failed");
  const Eigen::MatrixXd phi = llt.matrixL();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(n, omega.side());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
  return w * phi.transpose();
}

SamplePair sample(const SyntheticModel& model, Index n, std::uint64_t seed) {
  auto derive = [seed](std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  };
  return {sample_gaussian(model.omega_x, n, derive(1)), sample_gaussian(model.omega_y, n, derive(2))};
}

std::string model_to_json_text(const SyntheticModel& model) {
  const SynthParams& pr = model.params;
  json j = {
      {"kind", std::string(to_string(pr.kind))},
      {"p", pr.p},
      {"m", pr.m},
      {"p_er", pr.p_er},
      {"p_er_delta", pr.p_er_delta},
      {"conjunction_support", pr.conjunction_support},
      {"pd_margin", pr.pd_margin},
      {"seed", pr.seed},
      {"gamma", model.gamma},
      {"graph", edges_to_json(model.graph)},
      {"support", edges_to_json(model.support)},
      {"omega_x", block_to_json(model.omega_x)},
      {"omega_y", block_to_json(model.omega_y)},
      {"delta_star", block_to_json(model.delta_star)},
  };
  return j.dump(1) + "\n";
}

SyntheticModel model_from_json_text(std::string_view text) {
  try {
    const json j = json::parse(text);
    SyntheticModel model;
    SynthParams& pr = model.params;
    pr.kind = parse_graph_kind(j.at("kind").get<std::string>());
    pr.p = j.at("p").get<Index>();
    pr.m = j.at("m").get<Index>();
    pr.p_er = j.at("p_er").get<double>();
    pr.p_er_delta = j.at("p_er_delta").get<double>();
    pr.conjunction_support = j.at("conjunction_support").get<bool>();
    pr.pd_margin = j.at("pd_margin").get<double>();
    pr.seed = j.at("seed").get<std::uint64_t>();
    pr.validate();
    model.gamma = j.at("gamma").get<double>();
    model.graph = edges_from_json(j.at("graph"), pr.p);
    model.support = edges_from_json(j.at("support"), pr.p);
    model.omega_x = block_from_json(j.at("omega_x"));
    model.omega_y = block_from_json(j.at("omega_y"));
    model.delta_star = block_from_json(j.at("delta_star"));
    require(model.omega_x.nodes() == pr.p && model.omega_x.block_size() == pr.m && model.omega_x.same_layout(model.omega_y) &&
                model.omega_x.same_layout(model.delta_star),
            ErrorCode::Parse, "model matrices do not match the declared p and m");
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
}

}  // namespace diffgraph
