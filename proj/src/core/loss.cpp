#include "loss.hpp"

#include "error.hpp"

#include <cmath>
#include <random>

namespace diffgraph {
namespace {

constexpr Index kDenseEigenSide = 64;
constexpr double kPowerTolerance = 1e-8;
constexpr int kPowerMaxIterations = 1000;

void check_symmetric_psd(const Eigen::MatrixXd& s, const char* name) {
  require(s.allFinite(), ErrorCode::Numerical, std::string(name) + " has non-finite entries");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  require((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, ErrorCode::InvalidArgument,
          std::string(name) + " is not symmetric");
  if (s.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::Numerical, std::string(name) + ": eigen-solve failed");
  require(es.eigenvalues()(0) >= -1e-10 * scale, ErrorCode::InvalidArgument,
          std::string(name) + " is not positive semidefinite");
}

void check_same_shape(const BlockMatrix& delta, const CovariancePair& cov) {
  require(delta.same_layout(cov.sigma_x), ErrorCode::ShapeMismatch,
          "delta layout does not match the covariance layout");
}

double dense_extreme_eigenvalue(const Eigen::MatrixXd& sym, bool largest) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::Numerical, "symmetric eigen-solve failed");
  return largest ? es.eigenvalues()(sym.rows() - 1) : es.eigenvalues()(0);
}

}  // namespace

CovariancePair CovariancePair::make(BlockMatrix sigma_x, BlockMatrix sigma_y, std::size_t n_x, std::size_t n_y) {
  require(sigma_x.same_layout(sigma_y), ErrorCode::ShapeMismatch, "covariance layouts differ");
  require(n_x > 0 && n_y > 0, ErrorCode::InvalidArgument, "sample counts must be positive");
  check_symmetric_psd(sigma_x.dense(), "sigma_x");
  check_symmetric_psd(sigma_y.dense(), "sigma_y");
  return CovariancePair{std::move(sigma_x), std::move(sigma_y), n_x, n_y};
}

BlockMatrix sample_covariance(const Eigen::MatrixXd& samples, Index block_size, bool center) {
  require(samples.rows() >= 1, ErrorCode::InvalidArgument, "empty sample set");
  require(block_size > 0 && samples.cols() % block_size == 0 && samples.cols() > 0, ErrorCode::ShapeMismatch,
          "sample width is not a positive multiple of the block size");
  const double n = static_cast<double>(samples.rows());
  Eigen::MatrixXd s(samples.cols(), samples.cols());
  if (center) {
    Eigen::MatrixXd c = samples.rowwise() - samples.colwise().mean();
    s.setZero();
    s.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose(), 1.0 / n);
  } else {
    s.setZero();
    s.selfadjointView<Eigen::Lower>().rankUpdate(samples.transpose(), 1.0 / n);
  }
  s = s.selfadjointView<Eigen::Lower>();
  return BlockMatrix(std::move(s), block_size);
}

LossAndGradient dtrace_loss_and_gradient(const Eigen::MatrixXd& delta, const CovariancePair& cov) {
  const auto& sx = cov.sigma_x.dense();
  const auto& sy = cov.sigma_y.dense();
  Eigen::MatrixXd tmp = sx * delta;
  LossAndGradient out;
  out.gradient.noalias() = tmp * sy;
  // tr(Sx D Sy D^T) = <Sx D Sy, D>, tr(D (Sx - Sy)) = <D, (Sx - Sy)^T>
  const double quad = out.gradient.cwiseProduct(delta).sum();
  const double lin = delta.cwiseProduct((sx - sy).transpose()).sum();
  out.loss = 0.5 * quad - lin;
  out.gradient -= sx - sy;
  return out;
}

double dtrace_loss(const BlockMatrix& delta, const CovariancePair& cov) {
  check_same_shape(delta, cov);
  return dtrace_loss_and_gradient(delta.dense(), cov).loss;
}

BlockMatrix dtrace_gradient(const BlockMatrix& delta, const CovariancePair& cov) {
  check_same_shape(delta, cov);
  return BlockMatrix(dtrace_loss_and_gradient(delta.dense(), cov).gradient, delta.block_size());
}

double largest_eigenvalue(const Eigen::MatrixXd& sym) {
  require(sym.allFinite(), ErrorCode::Numerical, "matrix has non-finite entries");
  require(sym.rows() > 0, ErrorCode::InvalidArgument, "empty matrix");
  if (sym.rows() <= kDenseEigenSide) return dense_extreme_eigenvalue(sym, true);

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(sym.rows());
  for (Index i = 0; i < v.size(); ++i) v(i) = std::abs(normal(rng)) + 1.0;
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < kPowerMaxIterations; ++it) {
    Eigen::VectorXd w = sym * v;
    const double next = v.dot(w);  // Rayleigh quotient of the unit vector v
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= kPowerTolerance * std::abs(next)) {
      // Pad by the residual so the result does not undershoot the top eigenvalue it converged to.
      const Eigen::VectorXd sv = sym * v;
      const double rq = v.dot(sv);
      return rq + (sv - rq * v).norm();
    }
    estimate = next;
  }
  return dense_extreme_eigenvalue(sym, true);
}

double smallest_eigenvalue(const Eigen::MatrixXd& sym) {
  require(sym.allFinite(), ErrorCode::Numerical, "matrix has non-finite entries");
  require(sym.rows() > 0, ErrorCode::InvalidArgument, "empty matrix");
  return dense_extreme_eigenvalue(sym, false);
}

double lipschitz_lla(const CovariancePair& cov) {
  return largest_eigenvalue(cov.sigma_x.dense()) * largest_eigenvalue(cov.sigma_y.dense());
}

double lipschitz_redistributed(const CovariancePair& cov, const PenaltySpec& spec, Index block_size) {
  const double base = lipschitz_lla(cov);
  const double m = static_cast<double>(block_size);
  switch (spec.kind) {
    case PenaltyKind::Lasso: return base;
    case PenaltyKind::LogSum: return base + 2.0 * m * spec.lambda / spec.epsilon;
    case PenaltyKind::Scad: return base + 2.0 * m / (spec.a - 1.0);
  }
  return base;
}

void prox_block_l2_inplace(Eigen::MatrixXd& a, Index m, const Eigen::MatrixXd& weights, double eta) {
  const Index p = a.rows() / m;
  for (Index l = 0; l < p; ++l) {
    for (Index k = 0; k < p; ++k) {
      auto blk = a.block(k * m, l * m, m, m);
      const double norm = blk.norm();
      const double threshold = weights(k, l) * eta;
      if (norm <= threshold || norm == 0.0)
        blk.setZero();
      else
        blk *= 1.0 - threshold / norm;
    }
  }
}

void prox_block_l2_inplace(Eigen::MatrixXd& a, Index m, double weight, double eta) {
  const Index p = a.rows() / m;
  const double threshold = weight * eta;
  for (Index l = 0; l < p; ++l) {
    for (Index k = 0; k < p; ++k) {
      auto blk = a.block(k * m, l * m, m, m);
      const double norm = blk.norm();
      if (norm <= threshold || norm == 0.0)
        blk.setZero();
      else
        blk *= 1.0 - threshold / norm;
    }
  }
}

BlockMatrix prox_block_l2(const BlockMatrix& a, const Eigen::MatrixXd& weights, double eta) {
  require(eta > 0.0, ErrorCode::InvalidArgument, "prox step eta must be positive");
  require(weights.rows() == a.nodes() && weights.cols() == a.nodes(), ErrorCode::ShapeMismatch,
          "weight matrix must be p x p");
  require(weights.minCoeff() >= 0.0, ErrorCode::InvalidArgument, "prox weights must be nonnegative");
  Eigen::MatrixXd out = a.dense();
  prox_block_l2_inplace(out, a.block_size(), weights, eta);
  return BlockMatrix(std::move(out), a.block_size());
}

double penalized_objective(const BlockMatrix& delta, const CovariancePair& cov, const PenaltySpec& spec) {
  return dtrace_loss(delta, cov) + penalty_value(spec, delta);
}

double lla_objective(const BlockMatrix& delta, const CovariancePair& cov, const Eigen::MatrixXd& weights) {
  const Index p = delta.nodes();
  require(weights.rows() == p && weights.cols() == p, ErrorCode::ShapeMismatch, "weight matrix must be p x p");
  double pen = 0.0;
  for (Index l = 0; l < p; ++l)
    for (Index k = 0; k < p; ++k) pen += weights(k, l) * delta.block_norm(k, l);
  return dtrace_loss(delta, cov) + pen;
}

}  // namespace diffgraph
