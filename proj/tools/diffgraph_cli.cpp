// diffgraph command-line front end. Links only the C API.
//
//   diffgraph <command> --config FILE [--seed N] [--out DIR] [--penalty P] [--algorithm A]
//                       [--lambda X | --select bic|maxf1]
//
// The config file is flat "key = value" text; '#' starts a comment. Unknown keys are rejected.
// Every command writes config.resolved.txt (all keys, defaults filled in) into the output directory.

#include "diffgraph/diffgraph.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kRefused = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
  ApiError(dg_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  dg_status status;
};

int exit_for(dg_status s) {
  switch (s) {
    case DG_OK: return kOk;
    case DG_ERR_INVALID_ARGUMENT:
    case DG_ERR_SHAPE_MISMATCH:
    case DG_ERR_IO:
    case DG_ERR_PARSE: return kUsage;
    case DG_ERR_CAP_EXCEEDED: return kRefused;
    default: return kRuntime;
  }
}

void check(dg_status s, const std::string& context) {
  if (s != DG_OK)
    throw ApiError(s, context + ": " + dg_status_name(s) + ": " + dg_last_error_message());
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Matrix = Handle<dg_matrix, dg_matrix_free>;
using Covariance = Handle<dg_covariance, dg_covariance_free>;
using Result = Handle<dg_result, dg_result_free>;
using Model = Handle<dg_model, dg_model_free>;
using Benchmark = Handle<dg_benchmark, dg_benchmark_free>;
using IngestOptions = Handle<dg_ingest_options, dg_ingest_options_free>;

struct CString {
  char* p = nullptr;
  ~CString() { dg_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct Data {
  double* p = nullptr;
  size_t rows = 0, cols = 0;
  ~Data() { dg_data_free(p); }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// ---- configuration ----

class Config {
 public:
  explicit Config(std::vector<std::pair<std::string, std::string>> defaults) {
    for (auto& [k, v] : defaults) {
      order_.push_back(k);
      values_[k] = v;
    }
  }

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw UsageError(path + ":" + std::to_string(no) + ": expected key = value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), path + ":" + std::to_string(no));
    }
  }

  void set(const std::string& key, const std::string& value, const std::string& where = "flag") {
    if (!values_.count(key)) throw UsageError(where + ": unknown key '" + key + "' for this command");
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& str(const std::string& key) const { return values_.at(key); }

  double num(const std::string& key) const {
    const std::string& v = str(key);
    try {
      size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw UsageError("key '" + key + "' expects a number, got '" + v + "'");
    }
  }

  long long integer(const std::string& key) const {
    const std::string& v = str(key);
    try {
      size_t used = 0;
      const long long i = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return i;
    } catch (const std::exception&) {
      throw UsageError("key '" + key + "' expects an integer, got '" + v + "'");
    }
  }

  size_t count(const std::string& key, bool allow_zero = false) const {
    const long long i = integer(key);
    if (i < 0 || (i == 0 && !allow_zero)) throw UsageError("key '" + key + "' must be positive");
    return size_t(i);
  }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw UsageError("key '" + key + "' expects true/false, got '" + v + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream in(str(key));
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  std::string resolved() const {
    std::string text;
    for (const auto& k : order_) text += k + " = " + values_.at(k) + "\n";
    return text;
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

using Defaults = std::vector<std::pair<std::string, std::string>>;

void append(Defaults& d, const Defaults& more) { d.insert(d.end(), more.begin(), more.end()); }

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

Defaults model_defaults() {
  const dg_model_params p = dg_model_params_default();
  return {{"graph", "er"},
          {"p", std::to_string(p.nodes)},
          {"m", std::to_string(p.block_size)},
          {"p_er", fmt(p.p_er)},
          {"p_er_delta", fmt(p.p_er_delta)},
          {"conjunction_support", "false"},
          {"pd_margin", fmt(p.pd_margin)}};
}

Defaults penalty_defaults() {
  const dg_penalty d = dg_penalty_default(DG_PENALTY_LASSO, 0.0);
  return {{"penalty", "lasso"}, {"epsilon", fmt(d.epsilon)}, {"a", fmt(d.a)}};
}

Defaults solver_defaults() {
  const dg_solver_config c = dg_solver_config_default();
  return {{"algorithm", "auto"},
          {"i_max", std::to_string(c.i_max)},
          {"delta_tol", fmt(c.delta_tol)},
          {"warm_start", "default"},
          {"lla_rounds", std::to_string(c.lla_rounds)},
          {"edge_threshold", fmt(c.edge_threshold)}};
}

Defaults grid_defaults(const std::string& mode) {
  const dg_grid_options g = dg_grid_options_default();
  return {{"grid_mode", mode},
          {"grid_size", std::to_string(g.grid_size)},
          {"seed_lambda", fmt(g.seed_lambda)},
          {"lambda_floor", fmt(g.lambda_floor)},
          {"rel_precision", fmt(g.rel_precision)},
          {"max_bisection_steps", std::to_string(g.max_bisection_steps)},
          {"max_solver_calls", std::to_string(g.max_solver_calls)}};
}

Defaults data_defaults() {
  return {{"x_csv", ""}, {"y_csv", ""}, {"sigma_x_csv", ""}, {"sigma_y_csv", ""},
          {"n_x", "0"},  {"n_y", "0"},  {"center", "false"},  {"truth", ""}};
}

dg_model_params model_params(const Config& c) {
  dg_model_params p = dg_model_params_default();
  const std::string g = c.str("graph");
  if (g == "er") p.kind = DG_GRAPH_ER;
  else if (g == "ba") p.kind = DG_GRAPH_BA;
  else throw UsageError("graph must be er or ba");
  p.nodes = c.count("p");
  p.block_size = c.count("m");
  p.p_er = c.num("p_er");
  p.p_er_delta = c.num("p_er_delta");
  p.conjunction_support = c.flag("conjunction_support") ? 1 : 0;
  p.pd_margin = c.num("pd_margin");
  p.seed = uint64_t(c.integer("seed"));
  return p;
}

dg_penalty_kind penalty_kind(const std::string& name) {
  if (name == "lasso") return DG_PENALTY_LASSO;
  if (name == "logsum" || name == "log-sum") return DG_PENALTY_LOGSUM;
  if (name == "scad") return DG_PENALTY_SCAD;
  throw UsageError("penalty must be lasso, logsum or scad, got '" + name + "'");
}

const char* penalty_name(dg_penalty_kind k) {
  switch (k) {
    case DG_PENALTY_LASSO: return "lasso";
    case DG_PENALTY_LOGSUM: return "logsum";
    case DG_PENALTY_SCAD: return "scad";
  }
  return "?";
}

dg_penalty penalty(const Config& c, double lambda) {
  dg_penalty p = dg_penalty_default(penalty_kind(c.str("penalty")), lambda);
  p.epsilon = c.num("epsilon");
  p.a = c.num("a");
  return p;
}

dg_solver_config solver_config(const Config& c) {
  dg_solver_config s = dg_solver_config_default();
  const std::string a = c.str("algorithm");
  if (a == "auto") s.algorithm = DG_ALGORITHM_AUTO;
  else if (a == "lla") s.algorithm = DG_ALGORITHM_LLA;
  else if (a == "redistribution") s.algorithm = DG_ALGORITHM_REDISTRIBUTION;
  else throw UsageError("algorithm must be auto, lla or redistribution");
  s.i_max = int(c.count("i_max"));
  s.delta_tol = c.num("delta_tol");
  const std::string w = c.str("warm_start");
  if (w == "default") s.warm_start = DG_WARM_DEFAULT;
  else if (w == "zeros") s.warm_start = DG_WARM_ZEROS;
  else if (w == "lasso") s.warm_start = DG_WARM_LASSO;
  else throw UsageError("warm_start must be default, zeros or lasso");
  s.lla_rounds = int(c.count("lla_rounds"));
  s.edge_threshold = c.num("edge_threshold");
  return s;
}

dg_grid_options grid_options(const Config& c) {
  dg_grid_options g = dg_grid_options_default();
  const std::string mode = c.str("grid_mode");
  if (mode == "synthetic") g.mode = DG_GRID_SYNTHETIC;
  else if (mode == "real") g.mode = DG_GRID_REAL;
  else throw UsageError("grid_mode must be synthetic or real");
  g.grid_size = int(c.count("grid_size"));
  g.seed_lambda = c.num("seed_lambda");
  g.lambda_floor = c.num("lambda_floor");
  g.rel_precision = c.num("rel_precision");
  g.max_bisection_steps = int(c.count("max_bisection_steps"));
  g.max_solver_calls = int(c.count("max_solver_calls"));
  return g;
}

void require_file(const std::string& path, const std::string& key) {
  if (path.empty()) throw UsageError("key '" + key + "' is required");
  if (!fs::is_regular_file(path)) throw UsageError("input file '" + path + "' (" + key + ") does not exist");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ApiError(DG_ERR_IO, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ApiError(DG_ERR_IO, "write failed for '" + path.string() + "'");
}

// Covariances from sample CSVs (x_csv, y_csv) or covariance CSVs (sigma_x_csv, sigma_y_csv with n_x, n_y).
void load_covariance(const Config& c, Covariance& cov) {
  const size_t m = c.count("m");
  if (!c.str("x_csv").empty() || !c.str("y_csv").empty()) {
    require_file(c.str("x_csv"), "x_csv");
    require_file(c.str("y_csv"), "y_csv");
    Data x, y;
    check(dg_csv_read(c.str("x_csv").c_str(), &x.p, &x.rows, &x.cols), "reading x_csv");
    check(dg_csv_read(c.str("y_csv").c_str(), &y.p, &y.rows, &y.cols), "reading y_csv");
    if (x.cols != y.cols) throw UsageError("x_csv and y_csv have different column counts");
    if (x.cols % m != 0) throw UsageError("column count " + std::to_string(x.cols) + " is not a multiple of m");
    check(dg_covariance_from_samples(x.p, x.rows, y.p, y.rows, m, x.cols / m, c.flag("center") ? 1 : 0, cov.out()),
          "building covariances");
    return;
  }
  require_file(c.str("sigma_x_csv"), "sigma_x_csv");
  require_file(c.str("sigma_y_csv"), "sigma_y_csv");
  Matrix sx, sy;
  check(dg_matrix_load_csv(c.str("sigma_x_csv").c_str(), m, sx.out()), "reading sigma_x_csv");
  check(dg_matrix_load_csv(c.str("sigma_y_csv").c_str(), m, sy.out()), "reading sigma_y_csv");
  check(dg_covariance_from_matrices(sx.get(), sy.get(), c.count("n_x"), c.count("n_y"), cov.out()),
        "building covariances");
}

json report_json(const dg_eval_report& r) {
  return {{"f1", r.f1},         {"hamming", r.hamming}, {"frob_error", r.frob_error},
          {"support_recovered", bool(r.support_recovered)}, {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}};
}

// Writes delta.csv, edges.csv, trace.csv and summary.json for an estimate.
void write_result(const Config& c, const fs::path& out, const dg_result* r, json extra) {
  Matrix delta;
  check(dg_result_delta(r, delta.out()), "reading estimate");
  check(dg_matrix_save_csv(delta.get(), (out / "delta.csv").string().c_str()), "writing delta.csv");
  std::string edges = "k,l,norm\n";
  const size_t p = dg_matrix_nodes(delta.get());
  std::vector<double> norms(p * p);
  check(dg_matrix_block_norms(delta.get(), norms.data(), norms.size()), "block norms");
  for (size_t i = 0; i < dg_result_edge_count(r); ++i) {
    size_t k = 0, l = 0;
    check(dg_result_edge(r, i, &k, &l), "reading edges");
    edges += std::to_string(k) + "," + std::to_string(l) + "," + fmt(norms[k * p + l]) + "\n";
  }
  write_text(out / "edges.csv", edges);
  check(dg_result_save_trace_csv(r, (out / "trace.csv").string().c_str()), "writing trace.csv");

  CString summary;
  check(dg_result_summary_json(r, &summary.p), "summary");
  json j = json::parse(summary.str());
  j["trace_csv"] = "trace.csv";
  for (auto& [k, v] : extra.items()) j[k] = v;
  if (!c.str("truth").empty()) {
    require_file(c.str("truth"), "truth");
    Model truth;
    check(dg_model_load_json(c.str("truth").c_str(), truth.out()), "reading truth model");
    dg_eval_report rep{};
    check(dg_evaluate(r, truth.get(), &rep), "evaluating");
    j["evaluation"] = report_json(rep);
  }
  write_text(out / "summary.json", j.dump(2) + "\n");
  std::cout << "edges: " << dg_result_edge_count(r) << "  iterations: " << dg_result_total_iterations(r)
            << "  converged: " << (dg_result_converged(r) ? "true" : "false") << "\n";
}

// ---- commands ----

int cmd_simulate(const Config& c, const fs::path& out) {
  const size_t n = c.count("n");
  dg_model_params p = model_params(c);
  Model model;
  check(dg_model_generate(&p, model.out()), "generating model");
  check(dg_model_save_json(model.get(), (out / "model.json").string().c_str()), "writing model.json");
  const size_t side = p.nodes * p.block_size;
  std::vector<double> x(n * side), y(n * side);
  check(dg_model_sample(model.get(), n, uint64_t(c.integer("seed")), x.data(), y.data(), x.size()), "sampling");
  check(dg_csv_write((out / "x.csv").string().c_str(), x.data(), n, side, nullptr), "writing x.csv");
  check(dg_csv_write((out / "y.csv").string().c_str(), y.data(), n, side, nullptr), "writing y.csv");
  std::cout << "model: p=" << p.nodes << " m=" << p.block_size << " gamma=" << dg_model_gamma(model.get())
            << " differential edges=" << dg_model_support_size(model.get()) << "\n";
  return kOk;
}

int cmd_estimate(const Config& c, const fs::path& out) {
  if (c.str("lambda").empty()) throw UsageError("estimate needs lambda (config key or --lambda)");
  const double lambda = c.num("lambda");
  Covariance cov;
  load_covariance(c, cov);
  const dg_penalty pen = penalty(c, lambda);
  const dg_solver_config sc = solver_config(c);
  Result r;
  check(dg_estimate(cov.get(), &pen, &sc, nullptr, r.out()), "estimating");
  write_result(c, out, r.get(), json::object());
  return kOk;
}

int cmd_select(const Config& c, const fs::path& out) {
  if (c.str("select") != "bic")
    throw UsageError("select supports select = bic only; grid-max-F1 needs the truth and runs in benchmark");
  Covariance cov;
  load_covariance(c, cov);
  const dg_penalty pen = penalty(c, 1.0);
  const dg_solver_config sc = solver_config(c);
  const dg_grid_options g = grid_options(c);
  Result r;
  double lambda_star = 0.0;
  CString curve;
  check(dg_select_bic(cov.get(), &pen, &sc, &g, &lambda_star, r.out(), &curve.p), "selecting");
  write_text(out / "bic_curve.csv", curve.str());
  write_result(c, out, r.get(), json{{"lambda_star", lambda_star}, {"bic_curve_csv", "bic_curve.csv"}});
  std::cout << "lambda*: " << fmt(lambda_star) << "\n";
  return kOk;
}

int cmd_benchmark(const Config& c, const fs::path& out) {
  dg_benchmark_config b = dg_benchmark_config_default();
  b.model = model_params(c);
  std::vector<size_t> sizes;
  for (const auto& s : c.list("sample_sizes")) {
    try {
      size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size() || v <= 0) throw std::invalid_argument(s);
      sizes.push_back(size_t(v));
    } catch (const std::exception&) {
      throw UsageError("sample_sizes entries must be positive integers, got '" + s + "'");
    }
  }
  std::vector<dg_penalty_kind> kinds;
  for (const auto& s : c.list("penalties")) kinds.push_back(penalty_kind(s));
  if (sizes.empty() || kinds.empty()) throw UsageError("sample_sizes and penalties must be non-empty");
  b.sample_sizes = sizes.data();
  b.sample_size_count = sizes.size();
  b.penalties = kinds.data();
  b.penalty_count = kinds.size();
  b.epsilon = c.num("epsilon");
  b.a = c.num("a");
  b.runs = int(c.count("runs"));
  b.base_seed = uint64_t(c.integer("seed"));
  const std::string sel = c.str("select");
  if (sel == "maxf1") b.selection = DG_SELECT_MAXF1;
  else if (sel == "bic") b.selection = DG_SELECT_BIC;
  else throw UsageError("select must be maxf1 or bic");
  b.solver = solver_config(c);
  b.grid = grid_options(c);
  b.threads = int(c.count("threads", true));

  const size_t total = sizes.size() * kinds.size() * size_t(b.runs);
  struct Progress {
    size_t total;
  } prog{total};
  auto cb = [](size_t i, void* user) {
    std::cerr << "\r" << (i + 1) << "/" << static_cast<Progress*>(user)->total << std::flush;
  };
  Benchmark bench;
  check(dg_benchmark_run(&b, cb, &prog, bench.out()), "running benchmark");
  std::cerr << "\n";

  const char* names[] = {"runs.csv", "summary.csv", "table.txt"};
  for (int which = 0; which < 3; ++which) {
    CString s;
    check(dg_benchmark_export(bench.get(), which, &s.p), "exporting");
    write_text(out / names[which], s.str());
    if (which == 2) std::cout << s.str();
  }
  for (size_t i = 0; i < dg_benchmark_cell_count(bench.get()); ++i) {
    dg_cell_summary cell{};
    check(dg_benchmark_cell(bench.get(), i, &cell), "reading cell");
    if (cell.failed > 0)
      std::cerr << "warning: n=" << cell.n << " " << penalty_name(cell.penalty) << ": " << cell.failed
                << " failed runs\n";
  }
  return kOk;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_theory(const Config& c, const fs::path& out) {
  Model model;
  if (!c.str("model").empty()) {
    require_file(c.str("model"), "model");
    check(dg_model_load_json(c.str("model").c_str(), model.out()), "reading model");
  } else {
    dg_model_params p = model_params(c);
    check(dg_model_generate(&p, model.out()), "generating model");
  }
  Matrix sx, sy;
  check(dg_model_sigma_x(model.get(), sx.out()), "sigma_x");
  check(dg_model_sigma_y(model.get(), sy.out()), "sigma_y");
  const size_t p = dg_matrix_nodes(sx.get());
  std::vector<size_t> support;
  for (size_t i = 0; i < dg_model_support_size(model.get()); ++i) {
    size_t k = 0, l = 0;
    check(dg_model_support_edge(model.get(), i, &k, &l), "support");
    support.push_back(k);
    support.push_back(l);
  }
  const size_t edges = support.size() / 2;

  dg_theory_constants tc{};
  const dg_status st = dg_theory_constants_compute(sx.get(), sy.get(), support.data(), edges, c.num("tau"), &tc);
  if (st == DG_ERR_CAP_EXCEEDED) {
    std::cerr << "refused: " << dg_last_error_message()
              << "\ntheory checks build the (mp)^2 x (mp)^2 Hessian and are limited to small models\n";
    return kRefused;
  }
  check(st, "theory constants");

  const double n = c.num("n");
  dg_theorem1_report t1{};
  check(dg_theory_theorem1(&tc, double(tc.s), p, n, &t1), "theorem 1");
  const std::string t1_reason = t1.satisfied ? "" : dg_last_error_message();

  double lambda_n = t1.lambda_n;
  if (!std::isfinite(lambda_n)) {
    if (c.str("lambda").empty()) lambda_n = 0.0;
    else lambda_n = c.num("lambda");
  }
  json convexity = json::object();
  // Without a usable lambda the thresholds are undefined; report that instead of failing the run.
  if (lambda_n > 0.0)
  for (dg_penalty_kind k : {DG_PENALTY_LASSO, DG_PENALTY_LOGSUM, DG_PENALTY_SCAD}) {
    dg_penalty pen = dg_penalty_default(k, lambda_n);
    pen.epsilon = c.num("epsilon");
    pen.a = c.num("a");
    dg_convexity_report cr{};
    check(dg_theory_theorem2(sx.get(), sy.get(), &pen, lambda_n, &cr), "theorem 2");
    convexity[penalty_name(k)] = {{"phi_product", cr.phi_product}, {"threshold", cr.threshold},
                                  {"convex", bool(cr.convex)}};
  }

  const size_t ns = size_t(n);
  const size_t side = dg_matrix_side(sx.get());
  std::vector<double> x(ns * side), y(ns * side);
  check(dg_model_sample(model.get(), ns, uint64_t(c.integer("seed")), x.data(), y.data(), x.size()), "sampling");
  Covariance cov;
  check(dg_covariance_from_samples(x.data(), ns, y.data(), ns, dg_matrix_block_size(sx.get()), p, 0, cov.out()),
        "sample covariances");
  dg_rsc_report rsc{};
  check(dg_theory_rsc_check(cov.get(), sx.get(), sy.get(), support.data(), edges, int(c.count("trials")),
                            uint64_t(c.integer("seed")), &rsc),
        "restricted strong convexity");

  json j;
  j["constants"] = {{"M", tc.M},
                    {"M_sigma", tc.M_sigma},
                    {"kappa_gamma", finite_or_null(tc.kappa_gamma)},
                    {"alpha", tc.alpha},
                    {"sigma_bar_xy", tc.sigma_bar_xy},
                    {"C0", tc.C0},
                    {"tau", tc.tau},
                    {"phi_min_star", tc.phi_min_star},
                    {"irrepresentable", bool(tc.irrepresentable)},
                    {"s", tc.s}};
  j["theorem1"] = {{"n", n},
                   {"lambda_n", finite_or_null(t1.lambda_n)},
                   {"n_min", finite_or_null(t1.n_min)},
                   {"C_bar_alpha", finite_or_null(t1.C_bar_alpha)},
                   {"C_M_kappa", finite_or_null(t1.C_M_kappa)},
                   {"C_b1", finite_or_null(t1.C_b1)},
                   {"C_b2", finite_or_null(t1.C_b2)},
                   {"error_bound", finite_or_null(t1.error_bound)},
                   {"satisfied", bool(t1.satisfied)},
                   {"reason", t1_reason}};
  if (lambda_n > 0.0)
    j["theorem2"] = {{"lambda_n", lambda_n}, {"convexity", convexity}};
  else
    j["theorem2"] = {{"lambda_n", nullptr},
                     {"reason", "no lambda: theorem 1 gave none and the config sets no lambda"}};
  j["rsc"] = {{"trials", rsc.trials},
              {"violations_full", rsc.violations_full},
              {"violations_support", rsc.violations_support},
              {"min_ratio_full", rsc.min_ratio_full},
              {"min_ratio_support", rsc.min_ratio_support},
              {"N2", finite_or_null(rsc.N2)},
              {"n_exceeds_N2", bool(rsc.n_exceeds_N2)}};
  write_text(out / "theory.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_preprocess(const Config& c, const fs::path& out) {
  require_file(c.str("input"), "input");
  IngestOptions opt;
  check(dg_ingest_options_create(opt.out()), "ingest options");
  for (const char* key : {"features", "sites", "site_column", "time_column", "columns", "kelvin_columns",
                          "block_size", "hourly", "zero_offset"}) {
    const std::string& v = c.str(key);
    if (!v.empty()) check(dg_ingest_options_set(opt.get(), key, v.c_str()), std::string("option ") + key);
  }
  Data d;
  CString report;
  check(dg_preprocess_file(c.str("input").c_str(), opt.get(), &d.p, &d.rows, &d.cols, &report.p), "preprocessing");
  json rep = json::parse(report.str());
  std::vector<std::string> names;
  if (rep.contains("columns") && rep["columns"].is_array())
    for (const auto& n : rep["columns"]) names.push_back(n.get<std::string>());
  std::vector<const char*> header;
  for (const auto& n : names) header.push_back(n.c_str());
  check(dg_csv_write((out / "processed.csv").string().c_str(), d.p, d.rows, d.cols,
                     names.size() == d.cols ? header.data() : nullptr),
        "writing processed.csv");
  write_text(out / "report.json", report.str() + "\n");
  std::cout << "rows: " << d.rows << "  columns: " << d.cols << "\n";
  return kOk;
}

Defaults defaults_for(const std::string& cmd) {
  Defaults d = {{"seed", "1"}};
  if (cmd == "simulate") {
    append(d, model_defaults());
    d.push_back({"n", "1600"});
  } else if (cmd == "estimate" || cmd == "select") {
    d.push_back({"m", "4"});
    append(d, data_defaults());
    append(d, penalty_defaults());
    d.push_back({"lambda", ""});
    append(d, solver_defaults());
    if (cmd == "select") {
      d.push_back({"select", "bic"});
      append(d, grid_defaults("real"));
    }
  } else if (cmd == "benchmark") {
    append(d, model_defaults());
    append(d, {{"sample_sizes", "1600"}, {"penalties", "lasso,logsum,scad"}, {"runs", "10"},
               {"select", "maxf1"}, {"threads", "0"}});
    append(d, penalty_defaults());
    append(d, solver_defaults());
    append(d, grid_defaults("synthetic"));
  } else if (cmd == "theory") {
    append(d, model_defaults());
    append(d, {{"model", ""}, {"n", "10000"}, {"tau", "3"}, {"trials", "1000"}, {"lambda", ""}});
    append(d, penalty_defaults());
  } else if (cmd == "preprocess") {
    d = {{"input", ""},   {"features", ""},       {"sites", ""},         {"site_column", ""},
         {"time_column", ""}, {"columns", ""},   {"kelvin_columns", ""}, {"block_size", ""},
         {"hourly", "false"}, {"zero_offset", "0.0001"}};
  }
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffgraph: differential multi-attribute graphical model estimation"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(dg_version()));

  std::string config_path, out_dir = ".", penalty_flag, algorithm_flag, lambda_flag, select_flag;
  long long seed_flag = -1;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Generate a synthetic model and samples"},
      {"estimate", "Estimate the differential graph at a fixed lambda"},
      {"select", "Select lambda by BIC and estimate"},
      {"benchmark", "Repeated synthetic runs with per-run and aggregate tables"},
      {"theory", "Evaluate theoretical constants and conditions on a small model"},
      {"preprocess", "Load and preprocess a time-series CSV"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Flat key = value config file");
    sub->add_option("--seed", seed_flag, "Random seed (overrides the config)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--penalty", penalty_flag, "lasso | logsum | scad");
    sub->add_option("--algorithm", algorithm_flag, "lla | redistribution | auto");
    auto* lam = sub->add_option("--lambda", lambda_flag, "Fixed lambda");
    auto* sel = sub->add_option("--select", select_flag, "bic | maxf1");
    lam->excludes(sel);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    Config config(defaults_for(cmd));
    if (!config_path.empty()) config.load(config_path);
    auto override_key = [&](const std::string& key, const std::string& value) {
      if (value.empty()) return;
      if (!config.has(key)) throw UsageError("--" + key + " does not apply to '" + cmd + "'");
      config.set(key, value);
    };
    if (seed_flag >= 0) override_key("seed", std::to_string(seed_flag));
    override_key("penalty", penalty_flag);
    override_key("algorithm", algorithm_flag);
    override_key("lambda", lambda_flag);
    override_key("select", select_flag);

    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ApiError(DG_ERR_IO, "cannot create output directory '" + out_dir + "': " + ec.message());
    write_text(out / "config.resolved.txt", "command = " + cmd + "\n" + config.resolved());

    if (cmd == "simulate") return cmd_simulate(config, out);
    if (cmd == "estimate") return cmd_estimate(config, out);
    if (cmd == "select") return cmd_select(config, out);
    if (cmd == "benchmark") return cmd_benchmark(config, out);
    if (cmd == "theory") return cmd_theory(config, out);
    return cmd_preprocess(config, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ApiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
