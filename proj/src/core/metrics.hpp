#pragma once

#include "blockmat.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace diffgraph {

struct EvalReport {
  double f1 = 0.0;
  std::size_t hamming = 0;
  double frob_error = 0.0;  // ||D_hat - D*||_F / ||D*||_F, or ||D_hat||_F when D* = 0
  bool support_recovered = false;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// F1 = 2tp / (2tp + fp + fn), defined as 1 when both sets are empty.
EvalReport compare_edges(const EdgeSet& estimate, const EdgeSet& truth);

EvalReport evaluate(const BlockMatrix& delta_hat_sym, const EdgeSet& estimate, const BlockMatrix& delta_star,
                    const EdgeSet& truth);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

MeanSd mean_sd(const std::vector<double>& values);

struct Summary {
  std::size_t runs = 0;
  MeanSd f1;
  MeanSd hamming;
  MeanSd frob_error;
  MeanSd support_recovered;  // fraction of runs
};

Summary aggregate(const std::vector<EvalReport>& reports);

}  // namespace diffgraph
