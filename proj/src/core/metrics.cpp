#include "metrics.hpp"

#include "error.hpp"

#include <cmath>

namespace diffgraph {

EvalReport compare_edges(const EdgeSet& estimate, const EdgeSet& truth) {
  require(estimate.nodes() == truth.nodes(), ErrorCode::ShapeMismatch, "edge sets are over different node counts");
  EvalReport r;
  for (const auto& [k, l] : estimate) {
    if (truth.contains(k, l)) ++r.tp;
    else ++r.fp;
  }
  r.fn = truth.size() - r.tp;
  r.hamming = r.fp + r.fn;
  const std::size_t denom = 2 * r.tp + r.fp + r.fn;
  r.f1 = denom == 0 ? 1.0 : 2.0 * static_cast<double>(r.tp) / static_cast<double>(denom);
  r.support_recovered = r.hamming == 0;
  return r;
}

EvalReport evaluate(const BlockMatrix& delta_hat_sym, const EdgeSet& estimate, const BlockMatrix& delta_star,
                    const EdgeSet& truth) {
  require(delta_hat_sym.same_layout(delta_star), ErrorCode::ShapeMismatch, "estimate and truth differ in layout");
  EvalReport r = compare_edges(estimate, truth);
  const double diff = (delta_hat_sym.dense() - delta_star.dense()).norm();
  const double ref = delta_star.dense().norm();
  r.frob_error = ref > 0.0 ? diff / ref : diff;
  return r;
}

MeanSd mean_sd(const std::vector<double>& values) {
  require(!values.empty(), ErrorCode::InvalidArgument, "mean_sd: no values");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

Summary aggregate(const std::vector<EvalReport>& reports) {
  require(!reports.empty(), ErrorCode::InvalidArgument, "aggregate: no reports");
  std::vector<double> f1, ham, err, rec;
  for (const auto& r : reports) {
    f1.push_back(r.f1);
    ham.push_back(static_cast<double>(r.hamming));
    err.push_back(r.frob_error);
    rec.push_back(r.support_recovered ? 1.0 : 0.0);
  }
  return {reports.size(), mean_sd(f1), mean_sd(ham), mean_sd(err), mean_sd(rec)};
}

}  // namespace diffgraph
