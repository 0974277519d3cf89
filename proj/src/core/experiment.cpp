#include "experiment.hpp"

#include "error.hpp"
#include "loss.hpp"
#include "matrix_io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

namespace diffgraph {
namespace {

PenaltySpec spec_for(const Scenario& sc, PenaltyKind kind) {
  PenaltySpec s = PenaltySpec::of(kind, 1.0);
  s.epsilon = sc.epsilon;
  s.a = sc.a;
  return s;
}

struct Task {
  int run;
  std::size_t n_index;
};

void run_penalty(const Scenario& sc, const SyntheticModel& model, const CovariancePair& cov, RunOutcome& out) {
  const PenaltySpec base = spec_for(sc, out.penalty);
  SolverConfig cfg = sc.solver;
  out.algorithm = cfg.algorithm == Algorithm::Auto ? default_algorithm(out.penalty) : cfg.algorithm;
  cfg.algorithm = out.algorithm;

  auto track = [&](const EstimationResult& r) {
    if (r.algorithm == Algorithm::Lla) out.max_lla_ascent = std::max(out.max_lla_ascent, max_trace_ascent(r));
  };

  if (sc.selection == LambdaSelection::MaxF1) {
    const LambdaGrid grid = build_grid(cov, base, cfg, sc.grid);
    out.lambda_sm = grid.lambda_sm;
    bool have = false;
    for (double lambda : grid.points) {
      EstimationResult r = estimate(cov, base.with_lambda(lambda), cfg);
      track(r);
      const EvalReport rep = evaluate(r.delta_hat_sym, r.edge_set, model.delta_star, model.support);
      if (!have || rep.f1 >= out.report.f1) {
        out.report = rep;
        out.lambda = lambda;
        out.time = r.wall_time;
        out.iterations = r.total_iterations;
        out.converged = r.converged;
        have = true;
      }
    }
    out.best_grid_f1 = out.report.f1;
  } else {
    double best = 0.0;
    const GridVisitor visit = [&](std::size_t, double, const EstimationResult& r) {
      track(r);
      best = std::max(best, compare_edges(r.edge_set, model.support).f1);
    };
    const StandardizedSelection sel = select_standardized(cov, base, cfg, sc.grid, visit);
    const EstimationResult& r = sel.selection.result;
    out.lambda_sm = sel.grid.lambda_sm;
    out.lambda = sel.selection.lambda_star;
    out.report = evaluate(r.delta_hat_sym, r.edge_set, model.delta_star, model.support);
    out.time = r.wall_time;
    out.iterations = r.total_iterations;
    out.converged = r.converged;
    out.best_grid_f1 = best;
  }
  out.ok = true;
}

}  // namespace

std::string_view to_string(LambdaSelection s) { return s == LambdaSelection::MaxF1 ? "maxf1" : "bic"; }

LambdaSelection parse_lambda_selection(std::string_view name) {
  if (name == "maxf1") return LambdaSelection::MaxF1;
  if (name == "bic") return LambdaSelection::Bic;
  fail(ErrorCode::InvalidArgument, "unknown selection '" + std::string(name) + "' (expected maxf1|bic)");
}

void Scenario::validate() const {
  model.validate();
  require(!sample_sizes.empty(), ErrorCode::InvalidArgument, "benchmark needs at least one sample size");
  for (Index n : sample_sizes) require(n >= 2, ErrorCode::InvalidArgument, "sample sizes must be at least 2");
  require(!penalties.empty(), ErrorCode::InvalidArgument, "benchmark needs at least one penalty");
  require(runs >= 1, ErrorCode::InvalidArgument, "runs must be at least 1");
  require(threads >= 0, ErrorCode::InvalidArgument, "threads must be nonnegative");
  spec_for(*this, PenaltyKind::LogSum).validate();
  spec_for(*this, PenaltyKind::Scad).validate();
  solver.validate();
  grid.validate();
}

double max_trace_ascent(const EstimationResult& result) {
  double worst = 0.0;
  for (const auto& run : result.runs)
    for (std::size_t i = 1; i < run.trace.size(); ++i)
      worst = std::max(worst, run.trace[i].objective - run.trace[i - 1].objective);
  return worst;
}

BenchmarkResult run_benchmark(const Scenario& sc, const ProgressCallback& progress) {
  sc.validate();
  const std::size_t n_count = sc.sample_sizes.size();
  const std::size_t k_count = sc.penalties.size();
  BenchmarkResult result;
  result.outcomes.resize(n_count * static_cast<std::size_t>(sc.runs) * k_count);

  std::vector<Task> tasks;
  for (std::size_t ni = 0; ni < n_count; ++ni)
    for (int r = 0; r < sc.runs; ++r) tasks.push_back({r, ni});

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task task = tasks[t];
      const Index n = sc.sample_sizes[task.n_index];
      const std::uint64_t seed = sc.base_seed + static_cast<std::uint64_t>(task.run);
      const std::size_t offset = (task.n_index * static_cast<std::size_t>(sc.runs) + static_cast<std::size_t>(task.run)) * k_count;
      for (std::size_t k = 0; k < k_count; ++k) {
        RunOutcome& o = result.outcomes[offset + k];
        o.run = task.run;
        o.seed = seed;
        o.n = n;
        o.penalty = sc.penalties[k];
      }
      try {
        SynthParams params = sc.model;
        params.seed = seed;
        const SyntheticModel model = generate_model(params);
        const SamplePair data = sample(model, n, seed);
        const Index m = params.m;
        const CovariancePair cov = CovariancePair::make(sample_covariance(data.x, m), sample_covariance(data.y, m),
                                                        static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (std::size_t k = 0; k < k_count; ++k) {
          RunOutcome& o = result.outcomes[offset + k];
          o.true_edges = model.support.size();
          try {
            run_penalty(sc, model, cov, o);
          } catch (const std::exception& e) {
            o.ok = false;
            o.error = e.what();
          }
          if (progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(o);
          }
        }
      } catch (const std::exception& e) {
        for (std::size_t k = 0; k < k_count; ++k) {
          result.outcomes[offset + k].ok = false;
          result.outcomes[offset + k].error = e.what();
        }
      }
    }
  };

  int threads = sc.threads > 0 ? sc.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t ni = 0; ni < n_count; ++ni) {
    for (std::size_t k = 0; k < k_count; ++k) {
      CellSummary cell;
      cell.n = sc.sample_sizes[ni];
      cell.penalty = sc.penalties[k];
      std::vector<EvalReport> reports;
      std::vector<double> times, best;
      for (int r = 0; r < sc.runs; ++r) {
        const RunOutcome& o = result.outcomes[(ni * static_cast<std::size_t>(sc.runs) + static_cast<std::size_t>(r)) * k_count + k];
        ++cell.runs;
        if (!o.ok) {
          ++cell.failed;
          continue;
        }
        reports.push_back(o.report);
        times.push_back(o.time);
        best.push_back(o.best_grid_f1);
        cell.max_lla_ascent = std::max(cell.max_lla_ascent, o.max_lla_ascent);
      }
      if (!reports.empty()) {
        cell.metrics = aggregate(reports);
        cell.time = mean_sd(times);
        cell.best_grid_f1 = mean_sd(best);
      }
      result.cells.push_back(cell);
    }
  }
  return result;
}

std::string outcomes_csv(const BenchmarkResult& result) {
  using io::format_double;
  std::string out =
      "n,run,seed,penalty,algorithm,ok,lambda,lambda_sm,f1,hamming,est_error,support_recovered,tp,fp,fn,true_edges,"
      "time_s,iterations,converged,best_grid_f1,max_lla_ascent,error\n";
  for (const auto& o : result.outcomes) {
    std::string err = o.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += std::to_string(o.n) + "," + std::to_string(o.run) + "," + std::to_string(o.seed) + "," +
           std::string(to_string(o.penalty)) + "," + std::string(to_string(o.algorithm)) + "," + (o.ok ? "1" : "0") + "," +
           format_double(o.lambda) + "," + format_double(o.lambda_sm) + "," + format_double(o.report.f1) + "," +
           std::to_string(o.report.hamming) + "," + format_double(o.report.frob_error) + "," +
           (o.report.support_recovered ? "1" : "0") + "," + std::to_string(o.report.tp) + "," +
           std::to_string(o.report.fp) + "," + std::to_string(o.report.fn) + "," + std::to_string(o.true_edges) + "," +
           format_double(o.time) + "," + std::to_string(o.iterations) + "," + (o.converged ? "1" : "0") + "," +
           format_double(o.best_grid_f1) + "," + format_double(o.max_lla_ascent) + "," + err + "\n";
  }
  return out;
}

std::string summary_csv(const BenchmarkResult& result) {
  using io::format_double;
  std::string out =
      "n,penalty,runs,failed,f1_mean,f1_sd,hamming_mean,hamming_sd,est_error_mean,est_error_sd,time_mean,time_sd,"
      "best_grid_f1_mean,max_lla_ascent\n";
  for (const auto& c : result.cells) {
    out += std::to_string(c.n) + "," + std::string(to_string(c.penalty)) + "," + std::to_string(c.runs) + "," +
           std::to_string(c.failed) + "," + format_double(c.metrics.f1.mean) + "," + format_double(c.metrics.f1.sd) + "," +
           format_double(c.metrics.hamming.mean) + "," + format_double(c.metrics.hamming.sd) + "," +
           format_double(c.metrics.frob_error.mean) + "," + format_double(c.metrics.frob_error.sd) + "," +
           format_double(c.time.mean) + "," + format_double(c.time.sd) + "," + format_double(c.best_grid_f1.mean) + "," +
           format_double(c.max_lla_ascent) + "\n";
  }
  return out;
}

std::string summary_table(const BenchmarkResult& result) {
  std::vector<Index> ns;
  std::vector<PenaltyKind> kinds;
  for (const auto& c : result.cells) {
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
    if (std::find(kinds.begin(), kinds.end(), c.penalty) == kinds.end()) kinds.push_back(c.penalty);
  }
  auto cell_of = [&](Index n, PenaltyKind k) -> const CellSummary* {
    for (const auto& c : result.cells)
      if (c.n == n && c.penalty == k) return &c;
    return nullptr;
  };
  auto fmt = [](const MeanSd& v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f (%.*f)", digits, v.mean, digits, v.sd);
    return std::string(buf);
  };

  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-24s", "");
  out += buf;
  for (Index n : ns) {
    std::snprintf(buf, sizeof buf, "%-20s", ("n=" + std::to_string(n)).c_str());
    out += buf;
  }
  out += "\n";
  struct Row {
    const char* name;
    int digits;
    MeanSd (*get)(const CellSummary&);
  };
  const Row rows[] = {
      {"F1", 3, [](const CellSummary& c) { return c.metrics.f1; }},
      {"Hamming", 1, [](const CellSummary& c) { return c.metrics.hamming; }},
      {"error", 3, [](const CellSummary& c) { return c.metrics.frob_error; }},
      {"time (s)", 2, [](const CellSummary& c) { return c.time; }},
  };
  for (const auto& row : rows) {
    for (PenaltyKind k : kinds) {
      std::snprintf(buf, sizeof buf, "%-24s", (std::string(row.name) + ": " + std::string(to_string(k))).c_str());
      out += buf;
      for (Index n : ns) {
        const CellSummary* c = cell_of(n, k);
        std::string text = "-";
        if (c && c->failed < c->runs) text = fmt(row.get(*c), row.digits) + (c->failed > 0 ? "*" : "");
        std::snprintf(buf, sizeof buf, "%-20s", text.c_str());
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace diffgraph
