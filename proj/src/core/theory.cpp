#include "theory.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace diffgraph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_entry(const Eigen::MatrixXd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }
double max_row_sum(const Eigen::MatrixXd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff(); }

void check_pair(const BlockMatrix& sx, const BlockMatrix& sy) {
  require(sx.same_layout(sy), ErrorCode::ShapeMismatch, "covariances differ in layout");
  require(sx.nodes() >= 2, ErrorCode::InvalidArgument, "theory checks need at least 2 nodes");
}

void check_cap(Index side, Index cap) {
  if (side * side > cap)
    fail(ErrorCode::CapExceeded, "Tracy-Singh side " + std::to_string(side * side) + " exceeds the cap of " +
                                     std::to_string(cap) + "; theory checks are limited to small models");
}

double c0_of(Index m, Index p, double sigma_bar, double tau) {
  const double md = static_cast<double>(m);
  return 40.0 * md * sigma_bar * std::sqrt(2.0 * (tau + std::log(4.0 * md * md) / std::log(static_cast<double>(p))));
}

double phi_min_product(const BlockMatrix& sx, const BlockMatrix& sy) {
  return smallest_eigenvalue(sx.dense()) * smallest_eigenvalue(sy.dense());
}

}  // namespace

std::vector<Index> ordered_support(const EdgeSet& support) {
  const Index p = support.nodes();
  std::vector<Index> out;
  for (const auto& [k, l] : support) {
    out.push_back(bvec_block_index(k, l, p));
    if (k != l) out.push_back(bvec_block_index(l, k, p));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd block_norms_rect(const Eigen::MatrixXd& a, Index bs) {
  require(bs > 0 && a.rows() % bs == 0 && a.cols() % bs == 0, ErrorCode::ShapeMismatch,
          "matrix sides are not multiples of the block size");
  Eigen::MatrixXd out(a.rows() / bs, a.cols() / bs);
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = a.block(i * bs, j * bs, bs, bs).norm();
  return out;
}

Eigen::MatrixXd gamma_submatrix(const Eigen::MatrixXd& gamma, const std::vector<Index>& rows,
                                const std::vector<Index>& cols, Index m) {
  const Index b = m * m;
  Eigen::MatrixXd out(static_cast<Index>(rows.size()) * b, static_cast<Index>(cols.size()) * b);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out.block(Index(i) * b, Index(j) * b, b, b) = gamma.block(rows[i] * b, cols[j] * b, b, b);
  return out;
}

TheoryConstants compute_constants(const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                                  const EdgeSet& support, double tau, Index cap) {
  check_pair(sigma_x_star, sigma_y_star);
  require(support.nodes() == sigma_x_star.nodes(), ErrorCode::ShapeMismatch, "support is over a different node count");
  require(tau > 2.0, ErrorCode::InvalidArgument, "tau must exceed 2");
  const Index m = sigma_x_star.block_size();
  const Index p = sigma_x_star.nodes();
  check_cap(m * p, cap);

  TheoryConstants c;
  c.p = p;
  c.m = m;
  c.tau = tau;
  const Eigen::MatrixXd cx = block_norms(sigma_x_star);
  const Eigen::MatrixXd cy = block_norms(sigma_y_star);
  c.M = std::max(max_entry(cx), max_entry(cy));
  c.M_sigma = std::max(max_row_sum(cx), max_row_sum(cy));
  c.sigma_bar_xy = std::max(sigma_x_star.dense().diagonal().maxCoeff(), sigma_y_star.dense().diagonal().maxCoeff());
  c.C0 = c0_of(m, p, c.sigma_bar_xy, tau);
  c.phi_min_star = phi_min_product(sigma_x_star, sigma_y_star);

  const std::vector<Index> s_pos = ordered_support(support);
  c.s = static_cast<Index>(s_pos.size());
  std::vector<Index> sc_pos;
  for (Index t = 0; t < p * p; ++t)
    if (!std::binary_search(s_pos.begin(), s_pos.end(), t)) sc_pos.push_back(t);

  if (s_pos.empty()) {
    c.kappa_gamma = 0.0;
    c.alpha = 1.0;
    c.irrepresentable = true;
    return c;
  }

  const Eigen::MatrixXd gamma = tracy_singh(sigma_y_star, sigma_x_star, cap);
  const Eigen::MatrixXd g_ss = gamma_submatrix(gamma, s_pos, s_pos, m);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g_ss);
  require(lu.isInvertible(), ErrorCode::Numerical, "Gamma*_{S,S} is singular");
  const Eigen::MatrixXd g_ss_inv = lu.inverse();
  c.kappa_gamma = max_row_sum(block_norms_rect(g_ss_inv, m * m));

  double worst = 0.0;
  if (!sc_pos.empty()) {
    const Eigen::MatrixXd g_cs = gamma_submatrix(gamma, sc_pos, s_pos, m);
    const Eigen::MatrixXd prod = g_cs * g_ss_inv;
    // Each row of block norms is one e in S^c; its l1 norm is the row sum.
    worst = max_row_sum(block_norms_rect(prod, m * m));
  }
  c.alpha = 1.0 - worst;
  c.irrepresentable = c.alpha > 0.0;
  return c;
}

Theorem1Report theorem1_conditions(const TheoryConstants& c, double s, Index p, double n) {
  require(s >= 0.0, ErrorCode::InvalidArgument, "support size must be nonnegative");
  require(p >= 2, ErrorCode::InvalidArgument, "p must be at least 2");
  require(n > 0.0, ErrorCode::InvalidArgument, "n must be positive");
  Theorem1Report r;
  const double a = c.alpha;
  const double M = c.M;
  const double k = c.kappa_gamma;
  const double lnp = std::log(static_cast<double>(p));
  r.C_M_kappa = 1.5 * (1.0 + k * std::min(s * M * M, c.M_sigma * c.M_sigma));
  r.C_b2 = 9.0 * s * k * k * M * M;

  if (!(a > 0.0)) {
    r.C_bar_alpha = (1.0 - a) / (2.0 * (2.0 * M + 1.0) - 2.0 * a * M);
    r.lambda_n = kInf;
    r.n_min = kInf;
    r.C_b1 = kInf;
    r.error_bound = kInf;
    r.reason = "irrepresentability fails (alpha <= 0)";
    return r;
  }
  if (a >= 1.0) {
    r.C_bar_alpha = 0.0;
    r.lambda_n = kInf;
    r.n_min = kInf;
    r.C_b1 = kInf;
    r.error_bound = kInf;
    r.reason = "alpha must lie strictly inside (0,1)";
    return r;
  }
  r.C_bar_alpha = (1.0 - a) / (2.0 * (2.0 * M + 1.0) - 2.0 * a * M);
  const double lead = std::max(8.0 / a, 3.0 / (a * r.C_bar_alpha) * s * k * M * r.C_M_kappa);
  r.lambda_n = lead * c.C0 * std::sqrt(lnp / n);
  const double t1 = 1.0 / std::min(M * M, 1.0);
  const double t2 = 81.0 * M * M * s * s * k * k;
  const double t3 = 9.0 * s * s / std::pow(a * r.C_bar_alpha, 2) * std::pow(k * M * r.C_M_kappa, 2);
  r.n_min = std::max({t1, t2, t3}) * c.C0 * c.C0 * lnp;
  r.C_b1 = 3.0 * k * lead;
  r.error_bound = (r.C_b1 + r.C_b2) * c.C0 * std::sqrt(lnp / n);
  r.satisfied = n > r.n_min;
  if (!r.satisfied) r.reason = "sample size below n_min";
  return r;
}

ConvexityReport theorem2_convexity(const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                                   const PenaltySpec& spec, double lambda_n) {
  require(sigma_x_star.same_layout(sigma_y_star), ErrorCode::ShapeMismatch, "covariances differ in layout");
  spec.validate();
  ConvexityReport r;
  r.phi_product = phi_min_product(sigma_x_star, sigma_y_star);
  switch (spec.kind) {
    case PenaltyKind::Lasso: r.threshold = 0.0; break;
    case PenaltyKind::Scad: r.threshold = (64.0 / 63.0) / (spec.a - 1.0); break;
    case PenaltyKind::LogSum:
      require(lambda_n >= 0.0, ErrorCode::InvalidArgument, "lambda_n must be nonnegative");
      r.threshold = (64.0 / 63.0) * lambda_n / spec.epsilon;
      break;
  }
  r.convex = r.phi_product > r.threshold;
  return r;
}

RscReport rsc_check(const CovariancePair& cov_hat, const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                    const EdgeSet& support, int trials, std::uint64_t seed, double tau, Index cap) {
  check_pair(sigma_x_star, sigma_y_star);
  require(cov_hat.sigma_x.same_layout(sigma_x_star), ErrorCode::ShapeMismatch, "sample and true covariances differ");
  require(trials >= 1, ErrorCode::InvalidArgument, "trials must be positive");
  const Index m = sigma_x_star.block_size();
  const Index p = sigma_x_star.nodes();
  check_cap(m * p, cap);

  const TheoryConstants c = compute_constants(sigma_x_star, sigma_y_star, support, tau, cap);
  RscReport r;
  r.trials = trials;
  r.phi_min_star = c.phi_min_star;
  r.n = static_cast<double>(std::min(cov_hat.n_x, cov_hat.n_y));
  const double s = static_cast<double>(c.s);
  r.N2 = std::max(1.0 / (c.M * c.M), std::pow(192.0 * c.M * s / c.phi_min_star, 2)) * c.C0 * c.C0 *
         std::log(static_cast<double>(p));
  r.n_exceeds_N2 = r.n > r.N2;

  const Eigen::MatrixXd gamma = tracy_singh(cov_hat.sigma_y, cov_hat.sigma_x, cap);
  const std::vector<Index> s_pos = ordered_support(support);
  const Eigen::MatrixXd g_ss = gamma_submatrix(gamma, s_pos, s_pos, m);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  r.min_ratio_full = kInf;
  r.min_ratio_support = kInf;
  Eigen::VectorXd theta(gamma.rows());
  Eigen::VectorXd theta_s(g_ss.rows());
  for (int t = 0; t < trials; ++t) {
    for (Index i = 0; i < theta.size(); ++i) theta(i) = normal(rng);
    const double q = theta.dot(gamma * theta);
    const double sq = theta.squaredNorm();
    if (q < 0.75 * c.phi_min_star * sq) ++r.violations_full;
    if (sq > 0.0) r.min_ratio_full = std::min(r.min_ratio_full, q / (c.phi_min_star * sq));

    if (theta_s.size() == 0) continue;
    for (Index i = 0; i < theta_s.size(); ++i) theta_s(i) = normal(rng);
    const double qs = theta_s.dot(g_ss * theta_s);
    const double sqs = theta_s.squaredNorm();
    if (qs < (63.0 / 64.0) * c.phi_min_star * sqs) ++r.violations_support;
    if (sqs > 0.0) r.min_ratio_support = std::min(r.min_ratio_support, qs / (c.phi_min_star * sqs));
  }
  return r;
}

double stationarity_gap(const BlockMatrix& delta_hat, const CovariancePair& cov, const PenaltySpec& spec) {
  require(delta_hat.same_layout(cov.sigma_x), ErrorCode::ShapeMismatch, "estimate and covariances differ in layout");
  spec.validate();
  const Index m = delta_hat.block_size();
  const Index p = delta_hat.nodes();
  const Eigen::MatrixXd grad = dtrace_loss_and_gradient(delta_hat.dense(), cov).gradient;
  double gap = 0.0;
  for (Index l = 0; l < p; ++l) {
    for (Index k = 0; k < p; ++k) {
      const auto g = grad.block(k * m, l * m, m, m);
      const auto d = delta_hat.block(k, l);
      const double norm = d.norm();
      double residual = 0.0;
      if (norm == 0.0) {
        residual = std::max(0.0, g.norm() - spec.lambda);
      } else {
        residual = (g + (rho_prime(spec, norm) / norm) * d).norm();
      }
      gap = std::max(gap, residual);
    }
  }
  return gap;
}

double loss_floor(const CovariancePair& cov_hat, const BlockMatrix& sigma_x_star, const BlockMatrix& sigma_y_star,
                  const BlockMatrix& delta_star, Index cap) {
  check_pair(sigma_x_star, sigma_y_star);
  require(delta_star.same_layout(sigma_x_star) && cov_hat.sigma_x.same_layout(sigma_x_star), ErrorCode::ShapeMismatch,
          "loss_floor: layouts differ");
  check_cap(sigma_x_star.side(), cap);
  const double phi = phi_min_product(sigma_x_star, sigma_y_star);
  require(phi > 0.0, ErrorCode::Numerical, "true covariances are not positive definite");
  const Eigen::MatrixXd gamma = tracy_singh(cov_hat.sigma_y, cov_hat.sigma_x, cap);
  const Eigen::VectorXd theta = bvec(delta_star);
  const Eigen::VectorXd b = bvec(BlockMatrix(cov_hat.difference(), delta_star.block_size()));
  const Eigen::VectorXd b_tilde = gamma * theta - b;
  const double c = 0.5 * theta.dot(gamma * theta) - theta.dot(b);
  return -(2.0 / (3.0 * phi)) * b_tilde.squaredNorm() - std::abs(c);
}

}  // namespace diffgraph
