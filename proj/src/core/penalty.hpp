#pragma once

#include "blockmat.hpp"

#include <string>
#include <string_view>

namespace diffgraph {

enum class PenaltyKind { Lasso, LogSum, Scad };

std::string_view to_string(PenaltyKind kind);
PenaltyKind parse_penalty_kind(std::string_view name);

inline constexpr double kDefaultLogSumEpsilon = 1e-3;
inline constexpr double kDefaultScadA = 3.7;

/// Penalty rho_lambda applied to block Frobenius norms.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Lasso;
  double lambda = 1.0;
  double epsilon = kDefaultLogSumEpsilon;  // log-sum only
  double a = kDefaultScadA;                // SCAD only

  static PenaltySpec lasso(double lambda) { return {PenaltyKind::Lasso, lambda}; }
  static PenaltySpec log_sum(double lambda, double epsilon = kDefaultLogSumEpsilon) {
    return {PenaltyKind::LogSum, lambda, epsilon};
  }
  static PenaltySpec scad(double lambda, double a = kDefaultScadA) {
    return {PenaltyKind::Scad, lambda, kDefaultLogSumEpsilon, a};
  }
  static PenaltySpec of(PenaltyKind kind, double lambda) {
    PenaltySpec s;
    s.kind = kind;
    s.lambda = lambda;
    return s;
  }

  PenaltySpec with_lambda(double l) const {
    PenaltySpec s = *this;
    s.lambda = l;
    return s;
  }

  void validate() const;

  /// Weak-convexity constant: rho(u) + mu/2 u^2 is convex.
  double mu() const;
};

double rho(const PenaltySpec& spec, double u);

/// Derivative of rho at u0 >= 0; the right limit lambda at u0 = 0.
double rho_prime(const PenaltySpec& spec, double u0);

/// Per-block LLA weights rho'(||delta_bar^(kl)||_F).
Eigen::MatrixXd lla_weights(const PenaltySpec& spec, const BlockMatrix& delta_bar);

/// Gradient of sum_kl (rho - lambda|.|)(||delta^(kl)||_F); zero on zero blocks.
BlockMatrix redistribution_gradient(const PenaltySpec& spec, const BlockMatrix& delta);

/// sum_kl rho(||delta^(kl)||_F) over all blocks, diagonal included.
double penalty_value(const PenaltySpec& spec, const BlockMatrix& delta);

}  // namespace diffgraph
