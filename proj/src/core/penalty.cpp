#include "penalty.hpp"

#include "error.hpp"

#include <cmath>
#include <string>

namespace diffgraph {

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Lasso: return "lasso";
    case PenaltyKind::LogSum: return "logsum";
    case PenaltyKind::Scad: return "scad";
  }
  return "unknown";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
  if (name == "lasso") return PenaltyKind::Lasso;
  if (name == "logsum" || name == "log-sum") return PenaltyKind::LogSum;
  if (name == "scad") return PenaltyKind::Scad;
  fail(ErrorCode::InvalidArgument, "unknown penalty '" + std::string(name) + "' (expected lasso|logsum|scad)");
}

void PenaltySpec::validate() const {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::InvalidArgument, "penalty lambda must be positive");
  if (kind == PenaltyKind::LogSum)
    require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon < 1.0, ErrorCode::InvalidArgument,
            "log-sum epsilon must lie in (0, 1)");
  if (kind == PenaltyKind::Scad)
    require(std::isfinite(a) && a > 2.0, ErrorCode::InvalidArgument, "SCAD parameter a must exceed 2");
}

double PenaltySpec::mu() const {
  switch (kind) {
    case PenaltyKind::Lasso: return 0.0;
    case PenaltyKind::LogSum: return lambda / epsilon;
    case PenaltyKind::Scad: return 1.0 / (a - 1.0);
  }
  return 0.0;
}

double rho(const PenaltySpec& spec, double u) {
  const double x = std::abs(u);
  const double l = spec.lambda;
  switch (spec.kind) {
    case PenaltyKind::Lasso: return l * x;
    case PenaltyKind::LogSum: return l * spec.epsilon * std::log1p(x / spec.epsilon);
    case PenaltyKind::Scad:
      if (x <= l) return l * x;
      // tail starts at a*lambda, where the middle branch meets lambda^2 (a+1)/2
      if (x < spec.a * l) return (2.0 * spec.a * l * x - x * x - l * l) / (2.0 * (spec.a - 1.0));
      return l * l * (spec.a + 1.0) / 2.0;
  }
  return 0.0;
}

double rho_prime(const PenaltySpec& spec, double u0) {
  const double x = std::abs(u0);
  const double l = spec.lambda;
  switch (spec.kind) {
    case PenaltyKind::Lasso: return l;
    case PenaltyKind::LogSum: return l * spec.epsilon / (x + spec.epsilon);
    case PenaltyKind::Scad:
      if (x <= l) return l;
      if (x <= spec.a * l) return (spec.a * l - x) / (spec.a - 1.0);
      return 0.0;
  }
  return 0.0;
}

Eigen::MatrixXd lla_weights(const PenaltySpec& spec, const BlockMatrix& delta_bar) {
  const Index p = delta_bar.nodes();
  Eigen::MatrixXd w(p, p);
  for (Index l = 0; l < p; ++l)
    for (Index k = 0; k < p; ++k) w(k, l) = rho_prime(spec, delta_bar.block_norm(k, l));
  return w;
}

BlockMatrix redistribution_gradient(const PenaltySpec& spec, const BlockMatrix& delta) {
  BlockMatrix g = BlockMatrix::zeros(delta.block_size(), delta.nodes());
  if (spec.kind == PenaltyKind::Lasso) return g;
  const Index p = delta.nodes();
  for (Index l = 0; l < p; ++l) {
    for (Index k = 0; k < p; ++k) {
      const double norm = delta.block_norm(k, l);
      if (norm == 0.0) continue;
      // rho~'(u) = rho'(u) - lambda along the unit direction of the block
      const double factor = rho_prime(spec, norm) - spec.lambda;
      if (factor == 0.0) continue;
      g.block(k, l) = (factor / norm) * delta.block(k, l);
    }
  }
  return g;
}

double penalty_value(const PenaltySpec& spec, const BlockMatrix& delta) {
  const Index p = delta.nodes();
  double total = 0.0;
  for (Index l = 0; l < p; ++l)
    for (Index k = 0; k < p; ++k) total += rho(spec, delta.block_norm(k, l));
  return total;
}

}  // namespace diffgraph
