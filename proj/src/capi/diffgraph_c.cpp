#include "diffgraph/diffgraph.h"

#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/ingest.hpp"
#include "core/loss.hpp"
#include "core/matrix_io.hpp"
#include "core/metrics.hpp"
#include "core/modelsel.hpp"
#include "core/penalty.hpp"
#include "core/solver.hpp"
#include "core/synth.hpp"
#include "core/theory.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>
#include <vector>

using namespace diffgraph;

struct dg_matrix {
  BlockMatrix m;
};
struct dg_covariance {
  CovariancePair c;
};
struct dg_result {
  EstimationResult r;
  std::vector<EdgeSet::Edge> edges;
};
struct dg_model {
  SyntheticModel model;
  std::vector<EdgeSet::Edge> support;
};
struct dg_benchmark {
  BenchmarkResult b;
};
struct dg_ingest_options {
  IngestOptions o;
};

namespace {

thread_local std::string g_error;

dg_status code_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return DG_ERR_INVALID_ARGUMENT;
    case ErrorCode::ShapeMismatch: return DG_ERR_SHAPE_MISMATCH;
    case ErrorCode::Io: return DG_ERR_IO;
    case ErrorCode::Parse: return DG_ERR_PARSE;
    case ErrorCode::Numerical: return DG_ERR_NUMERICAL;
    case ErrorCode::Diverged: return DG_ERR_DIVERGED;
    case ErrorCode::CapExceeded: return DG_ERR_CAP_EXCEEDED;
    case ErrorCode::SearchFailed: return DG_ERR_SEARCH_FAILED;
  }
  return DG_ERR_INTERNAL;
}

template <class F>
dg_status guard(F&& f) {
  try {
    f();
    return DG_OK;
  } catch (const Error& e) {
    g_error = e.what();
    return code_of(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return DG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return DG_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return DG_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Eigen::MatrixXd from_row_major(const double* data, size_t rows, size_t cols) {
  Eigen::MatrixXd a(rows, cols);
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) a(Index(i), Index(j)) = data[i * cols + j];
  return a;
}

void to_row_major(const Eigen::MatrixXd& a, double* out) {
  const Index cols = a.cols();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < cols; ++j) out[i * cols + j] = a(i, j);
}

dg_matrix* wrap(BlockMatrix m) { return new dg_matrix{std::move(m)}; }

PenaltyKind kind_of(dg_penalty_kind k) {
  switch (k) {
    case DG_PENALTY_LASSO: return PenaltyKind::Lasso;
    case DG_PENALTY_LOGSUM: return PenaltyKind::LogSum;
    case DG_PENALTY_SCAD: return PenaltyKind::Scad;
  }
  fail(ErrorCode::InvalidArgument, "unknown penalty kind");
}

dg_penalty_kind kind_out(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::Lasso: return DG_PENALTY_LASSO;
    case PenaltyKind::LogSum: return DG_PENALTY_LOGSUM;
    case PenaltyKind::Scad: return DG_PENALTY_SCAD;
  }
  return DG_PENALTY_LASSO;
}

Algorithm algo_of(dg_algorithm a) {
  switch (a) {
    case DG_ALGORITHM_AUTO: return Algorithm::Auto;
    case DG_ALGORITHM_LLA: return Algorithm::Lla;
    case DG_ALGORITHM_REDISTRIBUTION: return Algorithm::Redistribution;
  }
  fail(ErrorCode::InvalidArgument, "unknown algorithm");
}

dg_algorithm algo_out(Algorithm a) {
  switch (a) {
    case Algorithm::Auto: return DG_ALGORITHM_AUTO;
    case Algorithm::Lla: return DG_ALGORITHM_LLA;
    case Algorithm::Redistribution: return DG_ALGORITHM_REDISTRIBUTION;
  }
  return DG_ALGORITHM_AUTO;
}

PenaltySpec spec_of(const dg_penalty* p) {
  need(p, "penalty");
  PenaltySpec s;
  s.kind = kind_of(p->kind);
  s.lambda = p->lambda;
  s.epsilon = p->epsilon;
  s.a = p->a;
  s.validate();
  return s;
}

SolverConfig config_of(const dg_solver_config* c, const dg_matrix* warm) {
  SolverConfig s;
  if (c) {
    s.algorithm = algo_of(c->algorithm);
    s.i_max = c->i_max;
    s.delta_tol = c->delta_tol;
    switch (c->warm_start) {
      case DG_WARM_DEFAULT: s.warm_start = WarmStart::Default; break;
      case DG_WARM_ZEROS: s.warm_start = WarmStart::Zeros; break;
      case DG_WARM_LASSO: s.warm_start = WarmStart::Lasso; break;
      case DG_WARM_SUPPLIED: s.warm_start = WarmStart::Supplied; break;
      default: fail(ErrorCode::InvalidArgument, "unknown warm start");
    }
    s.lla_rounds = c->lla_rounds;
    s.edge_threshold = c->edge_threshold;
  }
  if (warm) s.initial = warm->m;
  s.validate();
  return s;
}

GridOptions grid_of(const dg_grid_options* g) {
  GridOptions o;
  if (g) {
    o.mode = g->mode == DG_GRID_REAL ? GridMode::Real : GridMode::Synthetic;
    o.grid_size = g->grid_size;
    o.seed_lambda = g->seed_lambda;
    o.lambda_floor = g->lambda_floor;
    o.rel_precision = g->rel_precision;
    o.max_bisection_steps = g->max_bisection_steps;
    o.max_solver_calls = g->max_solver_calls;
  }
  o.validate();
  return o;
}

SynthParams params_of(const dg_model_params* p) {
  need(p, "params");
  SynthParams s;
  s.kind = p->kind == DG_GRAPH_BA ? GraphKind::BarabasiAlbert : GraphKind::ErdosRenyi;
  s.p = Index(p->nodes);
  s.m = Index(p->block_size);
  s.p_er = p->p_er;
  s.p_er_delta = p->p_er_delta;
  s.conjunction_support = p->conjunction_support != 0;
  s.pd_margin = p->pd_margin;
  s.seed = p->seed;
  s.validate();
  return s;
}

EdgeSet support_of(const size_t* support, size_t count, Index p) {
  if (count > 0) need(support, "support");
  EdgeSet s(p);
  for (size_t i = 0; i < count; ++i) {
    const size_t k = support[2 * i], l = support[2 * i + 1];
    require(Index(k) < p && Index(l) < p && k != l, ErrorCode::InvalidArgument, "support edge out of range");
    s.insert(Index(k), Index(l));
  }
  return s;
}

dg_eval_report report_out(const EvalReport& r) {
  return {r.f1, r.hamming, r.frob_error, r.support_recovered ? 1 : 0, r.tp, r.fp, r.fn};
}

dg_mean_sd ms_out(const MeanSd& m) { return {m.mean, m.sd}; }

dg_summary summary_out(const Summary& s) {
  return {s.runs, ms_out(s.f1), ms_out(s.hamming), ms_out(s.frob_error), ms_out(s.support_recovered)};
}

void check_capacity(size_t capacity, size_t needed) {
  require(capacity >= needed, ErrorCode::InvalidArgument,
          "output buffer too small: need " + std::to_string(needed) + ", have " + std::to_string(capacity));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

extern "C" {

const char* dg_version(void) { return "0.1.0"; }

const char* dg_last_error_message(void) { return g_error.c_str(); }

const char* dg_status_name(dg_status status) {
  switch (status) {
    case DG_OK: return "ok";
    case DG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DG_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case DG_ERR_IO: return "i/o error";
    case DG_ERR_PARSE: return "parse error";
    case DG_ERR_NUMERICAL: return "numerical error";
    case DG_ERR_DIVERGED: return "diverged";
    case DG_ERR_CAP_EXCEEDED: return "cap exceeded";
    case DG_ERR_SEARCH_FAILED: return "search failed";
    case DG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void dg_string_free(char* s) { std::free(s); }

/* ---- matrices ---- */

dg_status dg_matrix_create(size_t block_size, size_t nodes, const double* data, dg_matrix** out) {
  return guard([&] {
    need(out, "out");
    require(block_size > 0 && nodes > 0, ErrorCode::InvalidArgument, "block_size and nodes must be positive");
    const size_t side = block_size * nodes;
    Eigen::MatrixXd a = data ? from_row_major(data, side, side) : Eigen::MatrixXd::Zero(Index(side), Index(side));
    *out = wrap(BlockMatrix(std::move(a), Index(block_size)));
  });
}

void dg_matrix_free(dg_matrix* a) { delete a; }

size_t dg_matrix_block_size(const dg_matrix* a) { return a ? size_t(a->m.block_size()) : 0; }
size_t dg_matrix_nodes(const dg_matrix* a) { return a ? size_t(a->m.nodes()) : 0; }
size_t dg_matrix_side(const dg_matrix* a) { return a ? size_t(a->m.side()) : 0; }

dg_status dg_matrix_get(const dg_matrix* a, size_t row, size_t col, double* out) {
  return guard([&] {
    need(a, "matrix");
    need(out, "out");
    require(Index(row) < a->m.side() && Index(col) < a->m.side(), ErrorCode::InvalidArgument, "index out of range");
    *out = a->m.dense()(Index(row), Index(col));
  });
}

dg_status dg_matrix_copy_data(const dg_matrix* a, double* out, size_t capacity) {
  return guard([&] {
    need(a, "matrix");
    need(out, "out");
    check_capacity(capacity, size_t(a->m.side() * a->m.side()));
    to_row_major(a->m.dense(), out);
  });
}

dg_status dg_matrix_block_norms(const dg_matrix* a, double* out, size_t capacity) {
  return guard([&] {
    need(a, "matrix");
    need(out, "out");
    check_capacity(capacity, size_t(a->m.nodes() * a->m.nodes()));
    to_row_major(block_norms(a->m), out);
  });
}

dg_status dg_matrix_symmetrize(const dg_matrix* a, dg_matrix** out) {
  return guard([&] {
    need(a, "matrix");
    need(out, "out");
    *out = wrap(symmetrize(a->m));
  });
}

dg_status dg_matrix_load_csv(const char* path, size_t block_size, dg_matrix** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(io::read_block_csv(path, Index(block_size)));
  });
}

dg_status dg_matrix_save_csv(const dg_matrix* a, const char* path) {
  return guard([&] {
    need(a, "matrix");
    need(path, "path");
    io::write_csv_matrix(path, a->m.dense());
  });
}

dg_status dg_matrix_load_json(const char* path, dg_matrix** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(io::read_block_json(path));
  });
}

dg_status dg_matrix_save_json(const dg_matrix* a, const char* path) {
  return guard([&] {
    need(a, "matrix");
    need(path, "path");
    io::write_block_json(path, a->m);
  });
}

dg_status dg_csv_read(const char* path, double** data, size_t* rows, size_t* cols) {
  return guard([&] {
    need(path, "path");
    need(data, "data");
    need(rows, "rows");
    need(cols, "cols");
    const Eigen::MatrixXd a = io::read_csv_matrix(path);
    double* buf = static_cast<double*>(std::malloc(std::max<size_t>(1, size_t(a.size())) * sizeof(double)));
    if (!buf) throw std::bad_alloc();
    to_row_major(a, buf);
    *data = buf;
    *rows = size_t(a.rows());
    *cols = size_t(a.cols());
  });
}

dg_status dg_csv_write(const char* path, const double* data, size_t rows, size_t cols, const char* const* header) {
  return guard([&] {
    need(path, "path");
    if (rows * cols > 0) need(data, "data");
    std::vector<std::string> names;
    if (header)
      for (size_t j = 0; j < cols; ++j) {
        need(header[j], "header entry");
        names.emplace_back(header[j]);
      }
    io::write_csv_matrix(path, from_row_major(data, rows, cols), names);
  });
}

/* ---- penalties ---- */

dg_penalty dg_penalty_default(dg_penalty_kind kind, double lambda) {
  return {kind, lambda, kDefaultLogSumEpsilon, kDefaultScadA};
}

dg_solver_config dg_solver_config_default(void) {
  const SolverConfig s;
  return {DG_ALGORITHM_AUTO, s.i_max, s.delta_tol, DG_WARM_DEFAULT, s.lla_rounds, s.edge_threshold};
}

dg_status dg_penalty_rho(const dg_penalty* spec, double u, double* out) {
  return guard([&] {
    need(out, "out");
    *out = rho(spec_of(spec), u);
  });
}

dg_status dg_penalty_rho_prime(const dg_penalty* spec, double u, double* out) {
  return guard([&] {
    need(out, "out");
    *out = rho_prime(spec_of(spec), u);
  });
}

/* ---- covariances and loss ---- */

dg_status dg_covariance_from_samples(const double* x, size_t n_x, const double* y, size_t n_y, size_t block_size,
                                     size_t nodes, int center, dg_covariance** out) {
  return guard([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    require(n_x > 0 && n_y > 0, ErrorCode::InvalidArgument, "sample counts must be positive");
    require(block_size > 0 && nodes > 0, ErrorCode::InvalidArgument, "block_size and nodes must be positive");
    const size_t cols = block_size * nodes;
    auto sx = sample_covariance(from_row_major(x, n_x, cols), Index(block_size), center != 0);
    auto sy = sample_covariance(from_row_major(y, n_y, cols), Index(block_size), center != 0);
    *out = new dg_covariance{CovariancePair::make(std::move(sx), std::move(sy), n_x, n_y)};
  });
}

dg_status dg_covariance_from_matrices(const dg_matrix* sigma_x, const dg_matrix* sigma_y, size_t n_x, size_t n_y,
                                      dg_covariance** out) {
  return guard([&] {
    need(sigma_x, "sigma_x");
    need(sigma_y, "sigma_y");
    need(out, "out");
    *out = new dg_covariance{CovariancePair::make(sigma_x->m, sigma_y->m, n_x, n_y)};
  });
}

void dg_covariance_free(dg_covariance* cov) { delete cov; }

dg_status dg_covariance_sigma_x(const dg_covariance* cov, dg_matrix** out) {
  return guard([&] {
    need(cov, "covariance");
    need(out, "out");
    *out = wrap(cov->c.sigma_x);
  });
}

dg_status dg_covariance_sigma_y(const dg_covariance* cov, dg_matrix** out) {
  return guard([&] {
    need(cov, "covariance");
    need(out, "out");
    *out = wrap(cov->c.sigma_y);
  });
}

dg_status dg_dtrace_loss(const dg_matrix* delta, const dg_covariance* cov, double* out) {
  return guard([&] {
    need(delta, "delta");
    need(cov, "covariance");
    need(out, "out");
    *out = dtrace_loss(delta->m, cov->c);
  });
}

dg_status dg_dtrace_gradient(const dg_matrix* delta, const dg_covariance* cov, dg_matrix** out) {
  return guard([&] {
    need(delta, "delta");
    need(cov, "covariance");
    need(out, "out");
    *out = wrap(dtrace_gradient(delta->m, cov->c));
  });
}

dg_status dg_penalized_objective(const dg_matrix* delta, const dg_covariance* cov, const dg_penalty* spec,
                                 double* out) {
  return guard([&] {
    need(delta, "delta");
    need(cov, "covariance");
    need(out, "out");
    *out = penalized_objective(delta->m, cov->c, spec_of(spec));
  });
}

dg_status dg_lipschitz(const dg_covariance* cov, const dg_penalty* spec, dg_algorithm algorithm, double* out) {
  return guard([&] {
    need(cov, "covariance");
    need(out, "out");
    const PenaltySpec s = spec_of(spec);
    Algorithm a = algo_of(algorithm);
    if (a == Algorithm::Auto) a = default_algorithm(s.kind);
    *out = a == Algorithm::Lla ? lipschitz_lla(cov->c) : lipschitz_redistributed(cov->c, s, cov->c.block_size());
  });
}

dg_status dg_prox_block_l2(const dg_matrix* a, const double* weights, double eta, dg_matrix** out) {
  return guard([&] {
    need(a, "matrix");
    need(weights, "weights");
    need(out, "out");
    require(eta >= 0.0, ErrorCode::InvalidArgument, "eta must be nonnegative");
    const size_t p = size_t(a->m.nodes());
    Eigen::MatrixXd w = from_row_major(weights, p, p);
    require((w.array() >= 0.0).all(), ErrorCode::InvalidArgument, "weights must be nonnegative");
    *out = wrap(prox_block_l2(a->m, w, eta));
  });
}

/* ---- estimation ---- */

dg_status dg_estimate(const dg_covariance* cov, const dg_penalty* spec, const dg_solver_config* config,
                      const dg_matrix* warm_start, dg_result** out) {
  return guard([&] {
    need(cov, "covariance");
    need(out, "out");
    auto r = estimate(cov->c, spec_of(spec), config_of(config, warm_start));
    auto edges = r.edge_set.to_vector();
    *out = new dg_result{std::move(r), std::move(edges)};
  });
}

void dg_result_free(dg_result* r) { delete r; }

dg_status dg_result_delta(const dg_result* r, dg_matrix** out) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    *out = wrap(r->r.delta_hat_sym);
  });
}

dg_status dg_result_delta_raw(const dg_result* r, dg_matrix** out) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    *out = wrap(r->r.delta_hat);
  });
}

size_t dg_result_edge_count(const dg_result* r) { return r ? r->edges.size() : 0; }

dg_status dg_result_edge(const dg_result* r, size_t i, size_t* k, size_t* l) {
  return guard([&] {
    need(r, "result");
    need(k, "k");
    need(l, "l");
    require(i < r->edges.size(), ErrorCode::InvalidArgument, "edge index out of range");
    *k = size_t(r->edges[i].first);
    *l = size_t(r->edges[i].second);
  });
}

int dg_result_iterations(const dg_result* r) { return r ? r->r.iterations : 0; }
int dg_result_total_iterations(const dg_result* r) { return r ? r->r.total_iterations : 0; }
int dg_result_converged(const dg_result* r) { return r && r->r.converged ? 1 : 0; }
double dg_result_wall_time(const dg_result* r) { return r ? r->r.wall_time : 0.0; }
dg_algorithm dg_result_algorithm(const dg_result* r) { return r ? algo_out(r->r.algorithm) : DG_ALGORITHM_AUTO; }
size_t dg_result_trace_length(const dg_result* r) { return r ? r->r.objective_trace.size() : 0; }

double dg_result_trace_value(const dg_result* r, size_t i) {
  if (!r || i >= r->r.objective_trace.size()) return 0.0;
  return r->r.objective_trace[i];
}

dg_status dg_result_save_trace_csv(const dg_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    io::write_text_file(path, trace_csv(r->r));
  });
}

dg_status dg_result_summary_json(const dg_result* r, char** out) {
  return guard([&] {
    need(r, "result");
    need(out, "out");
    const auto& e = r->r;
    nlohmann::json j;
    j["algorithm"] = std::string(to_string(e.algorithm));
    j["penalty"] = {{"kind", std::string(to_string(e.penalty.kind))},
                    {"lambda", e.penalty.lambda},
                    {"epsilon", e.penalty.epsilon},
                    {"a", e.penalty.a}};
    j["iterations"] = e.iterations;
    j["total_iterations"] = e.total_iterations;
    j["converged"] = e.converged;
    j["wall_time"] = e.wall_time;
    j["edges"] = r->edges.size();
    j["final_objective"] = e.objective_trace.empty() ? 0.0 : e.objective_trace.back();
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : e.runs)
      runs.push_back({{"stage", run.stage}, {"iterations", run.iterations}, {"converged", run.converged},
                      {"step", run.step}});
    j["runs"] = runs;
    j["warnings"] = e.warnings;
    *out = dup_string(j.dump(2));
  });
}

/* ---- model selection ---- */

dg_grid_options dg_grid_options_default(void) {
  const GridOptions g;
  return {DG_GRID_SYNTHETIC, g.grid_size, g.seed_lambda, g.lambda_floor, g.rel_precision, g.max_bisection_steps,
          g.max_solver_calls};
}

dg_status dg_bic(const dg_matrix* delta, const dg_covariance* cov, double* out) {
  return guard([&] {
    need(delta, "delta");
    need(cov, "covariance");
    need(out, "out");
    *out = bic(delta->m, cov->c);
  });
}

dg_status dg_build_grid(const dg_covariance* cov, const dg_penalty* spec, const dg_solver_config* config,
                        const dg_grid_options* options, double* lambda_sm, double* points, size_t capacity,
                        size_t* count) {
  return guard([&] {
    need(cov, "covariance");
    need(lambda_sm, "lambda_sm");
    need(points, "points");
    need(count, "count");
    const GridOptions g = grid_of(options);
    check_capacity(capacity, size_t(g.grid_size));
    const LambdaGrid grid = build_grid(cov->c, spec_of(spec), config_of(config, nullptr), g);
    *lambda_sm = grid.lambda_sm;
    std::copy(grid.points.begin(), grid.points.end(), points);
    *count = grid.points.size();
  });
}

dg_status dg_select_bic(const dg_covariance* cov, const dg_penalty* spec, const dg_solver_config* config,
                        const dg_grid_options* options, double* lambda_star, dg_result** out, char** curve_csv) {
  return guard([&] {
    need(cov, "covariance");
    need(lambda_star, "lambda_star");
    need(out, "out");
    auto sel = select_standardized(cov->c, spec_of(spec), config_of(config, nullptr), grid_of(options));
    std::string csv;
    if (curve_csv) {
      csv = "lambda,bic,edges,objective\n";
      for (const auto& p : sel.selection.curve)
        csv += io::format_double(p.lambda) + "," + io::format_double(p.bic) + "," + std::to_string(p.edges) + "," +
               io::format_double(p.objective) + "\n";
    }
    *lambda_star = sel.selection.lambda_star;
    auto edges = sel.selection.result.edge_set.to_vector();
    auto* res = new dg_result{std::move(sel.selection.result), std::move(edges)};
    if (curve_csv) {
      try {
        *curve_csv = dup_string(csv);
      } catch (...) {
        delete res;
        throw;
      }
    }
    *out = res;
  });
}

/* ---- models ---- */

dg_model_params dg_model_params_default(void) {
  const SynthParams s;
  return {DG_GRAPH_ER, size_t(s.p), size_t(s.m), s.p_er, s.p_er_delta, s.conjunction_support ? 1 : 0,
          s.pd_margin, s.seed};
}

static dg_model* wrap_model(SyntheticModel m) {
  auto support = m.support.to_vector();
  return new dg_model{std::move(m), std::move(support)};
}

dg_status dg_model_generate(const dg_model_params* params, dg_model** out) {
  return guard([&] {
    need(out, "out");
    *out = wrap_model(generate_model(params_of(params)));
  });
}

void dg_model_free(dg_model* model) { delete model; }

#define DG_MODEL_MATRIX(name, expr)                         \
  dg_status name(const dg_model* model, dg_matrix** out) { \
    return guard([&] {                                      \
      need(model, "model");                                 \
      need(out, "out");                                     \
      *out = wrap(expr);                                    \
    });                                                     \
  }

DG_MODEL_MATRIX(dg_model_omega_x, model->model.omega_x)
DG_MODEL_MATRIX(dg_model_omega_y, model->model.omega_y)
DG_MODEL_MATRIX(dg_model_delta_star, model->model.delta_star)
DG_MODEL_MATRIX(dg_model_sigma_x, model->model.sigma_x())
DG_MODEL_MATRIX(dg_model_sigma_y, model->model.sigma_y())

#undef DG_MODEL_MATRIX

double dg_model_gamma(const dg_model* model) { return model ? model->model.gamma : 0.0; }
size_t dg_model_support_size(const dg_model* model) { return model ? model->support.size() : 0; }

dg_status dg_model_support_edge(const dg_model* model, size_t i, size_t* k, size_t* l) {
  return guard([&] {
    need(model, "model");
    need(k, "k");
    need(l, "l");
    require(i < model->support.size(), ErrorCode::InvalidArgument, "edge index out of range");
    *k = size_t(model->support[i].first);
    *l = size_t(model->support[i].second);
  });
}

dg_status dg_model_sample(const dg_model* model, size_t n, uint64_t seed, double* x, double* y, size_t capacity) {
  return guard([&] {
    need(model, "model");
    need(x, "x");
    need(y, "y");
    require(n > 0, ErrorCode::InvalidArgument, "n must be positive");
    check_capacity(capacity, n * size_t(model->model.omega_x.side()));
    const SamplePair s = sample(model->model, Index(n), seed);
    to_row_major(s.x, x);
    to_row_major(s.y, y);
  });
}

dg_status dg_model_save_json(const dg_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    need(path, "path");
    io::write_text_file(path, model_to_json_text(model->model));
  });
}

dg_status dg_model_load_json(const char* path, dg_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap_model(model_from_json_text(io::read_text_file(path)));
  });
}

/* ---- metrics ---- */

dg_status dg_evaluate(const dg_result* estimate, const dg_model* truth, dg_eval_report* out) {
  return guard([&] {
    need(estimate, "estimate");
    need(truth, "truth");
    need(out, "out");
    *out = report_out(evaluate(estimate->r.delta_hat_sym, estimate->r.edge_set, truth->model.delta_star,
                               truth->model.support));
  });
}

dg_status dg_aggregate(const dg_eval_report* reports, size_t count, dg_summary* out) {
  return guard([&] {
    if (count > 0) need(reports, "reports");
    need(out, "out");
    std::vector<EvalReport> v(count);
    for (size_t i = 0; i < count; ++i) {
      v[i].f1 = reports[i].f1;
      v[i].hamming = reports[i].hamming;
      v[i].frob_error = reports[i].frob_error;
      v[i].support_recovered = reports[i].support_recovered != 0;
      v[i].tp = reports[i].tp;
      v[i].fp = reports[i].fp;
      v[i].fn = reports[i].fn;
    }
    *out = summary_out(aggregate(v));
  });
}

/* ---- benchmark ---- */

dg_benchmark_config dg_benchmark_config_default(void) {
  const Scenario s;
  dg_benchmark_config c{};
  c.model = dg_model_params_default();
  c.sample_sizes = nullptr;
  c.sample_size_count = 0;
  c.penalties = nullptr;
  c.penalty_count = 0;
  c.epsilon = s.epsilon;
  c.a = s.a;
  c.runs = s.runs;
  c.base_seed = s.base_seed;
  c.selection = DG_SELECT_MAXF1;
  c.solver = dg_solver_config_default();
  c.grid = dg_grid_options_default();
  c.threads = s.threads;
  return c;
}

dg_status dg_benchmark_run(const dg_benchmark_config* config, dg_progress_fn progress, void* user,
                           dg_benchmark** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    Scenario s;
    s.model = params_of(&config->model);
    if (config->sample_size_count > 0) {
      need(config->sample_sizes, "sample_sizes");
      s.sample_sizes.assign(config->sample_sizes, config->sample_sizes + config->sample_size_count);
    }
    if (config->penalty_count > 0) {
      need(config->penalties, "penalties");
      s.penalties.clear();
      for (size_t i = 0; i < config->penalty_count; ++i) s.penalties.push_back(kind_of(config->penalties[i]));
    }
    s.epsilon = config->epsilon;
    s.a = config->a;
    s.runs = config->runs;
    s.base_seed = config->base_seed;
    s.selection = config->selection == DG_SELECT_BIC ? LambdaSelection::Bic : LambdaSelection::MaxF1;
    s.solver = config_of(&config->solver, nullptr);
    s.grid = grid_of(&config->grid);
    s.threads = config->threads;
    s.validate();

    // Progress indices follow completion order.
    size_t done = 0;
    ProgressCallback cb;
    if (progress) cb = [&](const RunOutcome&) { progress(done++, user); };
    *out = new dg_benchmark{run_benchmark(s, cb)};
  });
}

void dg_benchmark_free(dg_benchmark* b) { delete b; }

size_t dg_benchmark_outcome_count(const dg_benchmark* b) { return b ? b->b.outcomes.size() : 0; }

dg_status dg_benchmark_outcome(const dg_benchmark* b, size_t i, dg_run_outcome* out) {
  return guard([&] {
    need(b, "benchmark");
    need(out, "out");
    require(i < b->b.outcomes.size(), ErrorCode::InvalidArgument, "outcome index out of range");
    const RunOutcome& o = b->b.outcomes[i];
    out->run = o.run;
    out->seed = o.seed;
    out->n = size_t(o.n);
    out->penalty = kind_out(o.penalty);
    out->algorithm = algo_out(o.algorithm);
    out->ok = o.ok ? 1 : 0;
    out->lambda = o.lambda;
    out->lambda_sm = o.lambda_sm;
    out->report = report_out(o.report);
    out->time = o.time;
    out->iterations = o.iterations;
    out->converged = o.converged ? 1 : 0;
    out->best_grid_f1 = o.best_grid_f1;
    out->max_lla_ascent = o.max_lla_ascent;
    out->true_edges = o.true_edges;
  });
}

size_t dg_benchmark_cell_count(const dg_benchmark* b) { return b ? b->b.cells.size() : 0; }

dg_status dg_benchmark_cell(const dg_benchmark* b, size_t i, dg_cell_summary* out) {
  return guard([&] {
    need(b, "benchmark");
    need(out, "out");
    require(i < b->b.cells.size(), ErrorCode::InvalidArgument, "cell index out of range");
    const CellSummary& c = b->b.cells[i];
    out->n = size_t(c.n);
    out->penalty = kind_out(c.penalty);
    out->runs = c.runs;
    out->failed = c.failed;
    out->metrics = summary_out(c.metrics);
    out->time = ms_out(c.time);
    out->best_grid_f1 = ms_out(c.best_grid_f1);
    out->max_lla_ascent = c.max_lla_ascent;
  });
}

dg_status dg_benchmark_export(const dg_benchmark* b, int which, char** out) {
  return guard([&] {
    need(b, "benchmark");
    need(out, "out");
    switch (which) {
      case 0: *out = dup_string(outcomes_csv(b->b)); break;
      case 1: *out = dup_string(summary_csv(b->b)); break;
      case 2: *out = dup_string(summary_table(b->b)); break;
      default: fail(ErrorCode::InvalidArgument, "export kind must be 0, 1 or 2");
    }
  });
}

/* ---- theory ---- */

dg_status dg_theory_constants_compute(const dg_matrix* sigma_x_star, const dg_matrix* sigma_y_star,
                                      const size_t* support, size_t edge_count, double tau,
                                      dg_theory_constants* out) {
  return guard([&] {
    need(sigma_x_star, "sigma_x_star");
    need(sigma_y_star, "sigma_y_star");
    need(out, "out");
    const EdgeSet s = support_of(support, edge_count, sigma_x_star->m.nodes());
    const TheoryConstants c = compute_constants(sigma_x_star->m, sigma_y_star->m, s, tau);
    *out = {c.M, c.M_sigma, c.kappa_gamma, c.alpha, c.sigma_bar_xy, c.C0, c.tau, c.phi_min_star,
            c.irrepresentable ? 1 : 0, size_t(c.s)};
  });
}

dg_status dg_theory_theorem1(const dg_theory_constants* c, double s, size_t p, double n, dg_theorem1_report* out) {
  return guard([&] {
    need(c, "constants");
    need(out, "out");
    TheoryConstants t;
    t.M = c->M;
    t.M_sigma = c->M_sigma;
    t.kappa_gamma = c->kappa_gamma;
    t.alpha = c->alpha;
    t.sigma_bar_xy = c->sigma_bar_xy;
    t.C0 = c->C0;
    t.tau = c->tau;
    t.phi_min_star = c->phi_min_star;
    t.irrepresentable = c->irrepresentable != 0;
    t.p = Index(p);
    t.s = Index(c->s);
    const Theorem1Report r = theorem1_conditions(t, s, Index(p), n);
    if (!r.reason.empty()) g_error = r.reason;
    *out = {r.lambda_n, r.n_min, r.C_bar_alpha, r.C_M_kappa, r.C_b1, r.C_b2, r.error_bound, r.satisfied ? 1 : 0};
  });
}

dg_status dg_theory_theorem2(const dg_matrix* sigma_x_star, const dg_matrix* sigma_y_star, const dg_penalty* spec,
                             double lambda_n, dg_convexity_report* out) {
  return guard([&] {
    need(sigma_x_star, "sigma_x_star");
    need(sigma_y_star, "sigma_y_star");
    need(out, "out");
    const ConvexityReport r = theorem2_convexity(sigma_x_star->m, sigma_y_star->m, spec_of(spec), lambda_n);
    *out = {r.phi_product, r.threshold, r.convex ? 1 : 0};
  });
}

dg_status dg_theory_rsc_check(const dg_covariance* cov_hat, const dg_matrix* sigma_x_star,
                              const dg_matrix* sigma_y_star, const size_t* support, size_t edge_count, int trials,
                              uint64_t seed, dg_rsc_report* out) {
  return guard([&] {
    need(cov_hat, "covariance");
    need(sigma_x_star, "sigma_x_star");
    need(sigma_y_star, "sigma_y_star");
    need(out, "out");
    const EdgeSet s = support_of(support, edge_count, sigma_x_star->m.nodes());
    const RscReport r = rsc_check(cov_hat->c, sigma_x_star->m, sigma_y_star->m, s, trials, seed);
    *out = {r.trials, r.violations_full, r.violations_support, r.min_ratio_full, r.min_ratio_support,
            r.phi_min_star, r.n, r.N2, r.n_exceeds_N2 ? 1 : 0};
  });
}

dg_status dg_theory_stationarity_gap(const dg_matrix* delta, const dg_covariance* cov, const dg_penalty* spec,
                                     double* out) {
  return guard([&] {
    need(delta, "delta");
    need(cov, "covariance");
    need(out, "out");
    *out = stationarity_gap(delta->m, cov->c, spec_of(spec));
  });
}

/* ---- ingest ---- */

dg_status dg_ingest_options_create(dg_ingest_options** out) {
  return guard([&] {
    need(out, "out");
    *out = new dg_ingest_options{};
  });
}

void dg_ingest_options_free(dg_ingest_options* opt) { delete opt; }

dg_status dg_ingest_options_set(dg_ingest_options* opt, const char* key, const char* value) {
  return guard([&] {
    need(opt, "options");
    need(key, "key");
    need(value, "value");
    const std::string k = key, v = value;
    IngestOptions& o = opt->o;
    if (k == "features") {
      o.features = split_list(v);
    } else if (k == "sites") {
      o.sites = split_list(v);
    } else if (k == "columns") {
      o.columns = split_list(v);
    } else if (k == "kelvin_columns") {
      o.kelvin_columns = split_list(v);
    } else if (k == "site_column") {
      o.site_column = v;
    } else if (k == "time_column") {
      o.time_column = v;
    } else if (k == "block_size") {
      char* end = nullptr;
      const long b = std::strtol(v.c_str(), &end, 10);
      require(end && *end == '\0' && !v.empty() && b > 0, ErrorCode::InvalidArgument,
              "block_size must be a positive integer");
      o.block_size = b;
    } else if (k == "hourly") {
      if (v == "1" || v == "true") o.hourly = true;
      else if (v == "0" || v == "false") o.hourly = false;
      else fail(ErrorCode::InvalidArgument, "hourly must be 0/1 or true/false");
    } else if (k == "zero_offset") {
      double d = 0.0;
      require(io::parse_double(v, d) && d > 0.0, ErrorCode::InvalidArgument, "zero_offset must be a positive number");
      o.zero_offset = d;
    } else {
      fail(ErrorCode::InvalidArgument, "unknown ingest option: " + k);
    }
  });
}

dg_status dg_preprocess_file(const char* path, const dg_ingest_options* opt, double** data, size_t* rows,
                             size_t* cols, char** report_json) {
  return guard([&] {
    need(path, "path");
    need(opt, "options");
    need(data, "data");
    need(rows, "rows");
    need(cols, "cols");
    const FeaturePanel panel = load_panel(path, opt->o);
    const Preprocessed pre = preprocess(panel, opt->o.zero_offset);
    const size_t r = size_t(pre.data.rows()), c = size_t(pre.data.cols());
    double* buf = static_cast<double*>(std::malloc(std::max<size_t>(1, r * c) * sizeof(double)));
    if (!buf) throw std::bad_alloc();
    to_row_major(pre.data, buf);
    if (report_json) {
      try {
        *report_json = dup_string(diffgraph::report_json(panel, pre));
      } catch (...) {
        std::free(buf);
        throw;
      }
    }
    *data = buf;
    *rows = r;
    *cols = c;
  });
}

void dg_data_free(double* data) { std::free(data); }

}  // extern "C"
