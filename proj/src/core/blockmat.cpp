#include "blockmat.hpp"

#include "error.hpp"

#include <algorithm>
#include <string>

namespace diffgraph {

BlockMatrix::BlockMatrix(Eigen::MatrixXd data, Index block_size) : data_(std::move(data)), m_(block_size) {
  require(block_size > 0, ErrorCode::InvalidArgument, "block size must be positive");
  require(data_.rows() == data_.cols(), ErrorCode::ShapeMismatch,
          "block matrix must be square, got " + std::to_string(data_.rows()) + "x" +
              std::to_string(data_.cols()));
  require(data_.rows() % block_size == 0, ErrorCode::ShapeMismatch,
          "matrix side " + std::to_string(data_.rows()) + " is not a multiple of block size " +
              std::to_string(block_size));
  p_ = data_.rows() / block_size;
}

BlockMatrix BlockMatrix::zeros(Index block_size, Index nodes) {
  return BlockMatrix(Eigen::MatrixXd::Zero(block_size * nodes, block_size * nodes), block_size);
}

BlockMatrix BlockMatrix::identity(Index block_size, Index nodes) {
  return BlockMatrix(Eigen::MatrixXd::Identity(block_size * nodes, block_size * nodes), block_size);
}

void EdgeSet::insert(Index k, Index l) {
  require(k >= 0 && l >= 0 && k < p_ && l < p_, ErrorCode::InvalidArgument,
          "edge (" + std::to_string(k) + "," + std::to_string(l) + ") outside node range");
  require(allow_self_ || k != l, ErrorCode::InvalidArgument, "self-loop not allowed");
  edges_.emplace(std::min(k, l), std::max(k, l));
}

bool EdgeSet::contains(Index k, Index l) const {
  return edges_.count({std::min(k, l), std::max(k, l)}) > 0;
}

Eigen::MatrixXd block_norms(const BlockMatrix& a) {
  const Index p = a.nodes();
  Eigen::MatrixXd out(p, p);
  for (Index l = 0; l < p; ++l)
    for (Index k = 0; k < p; ++k) out(k, l) = a.block_norm(k, l);
  return out;
}

Eigen::VectorXd bvec(const BlockMatrix& a) {
  const Index m = a.block_size();
  const Index p = a.nodes();
  Eigen::VectorXd out(m * m * p * p);
  for (Index l = 0; l < p; ++l) {
    for (Index k = 0; k < p; ++k) {
      const Index base = bvec_block_index(k, l, p) * m * m;
      const auto blk = a.block(k, l);
      for (Index s = 0; s < m; ++s)
        for (Index r = 0; r < m; ++r) out(base + s * m + r) = blk(r, s);
    }
  }
  return out;
}

BlockMatrix bvec_inverse(const Eigen::VectorXd& v, Index block_size, Index nodes) {
  const Index m = block_size;
  const Index p = nodes;
  require(v.size() == m * m * p * p, ErrorCode::ShapeMismatch, "bvec length does not match m^2 p^2");
  BlockMatrix out = BlockMatrix::zeros(m, p);
  for (Index l = 0; l < p; ++l) {
    for (Index k = 0; k < p; ++k) {
      const Index base = bvec_block_index(k, l, p) * m * m;
      auto blk = out.block(k, l);
      for (Index s = 0; s < m; ++s)
        for (Index r = 0; r < m; ++r) blk(r, s) = v(base + s * m + r);
    }
  }
  return out;
}

Eigen::MatrixXd tracy_singh(const BlockMatrix& a, const BlockMatrix& b, Index cap) {
  const Index ma = a.block_size(), pa = a.nodes();
  const Index mb = b.block_size(), pb = b.nodes();
  const Index side = a.side() * b.side();
  require(side <= cap, ErrorCode::CapExceeded,
          "Tracy-Singh product side " + std::to_string(side) + " exceeds cap " + std::to_string(cap));
  const Index cell = ma * mb;
  Eigen::MatrixXd out(side, side);
  for (Index i = 0; i < pa; ++i) {
    for (Index j = 0; j < pa; ++j) {
      const auto aij = a.block(i, j);
      for (Index k = 0; k < pb; ++k) {
        for (Index l = 0; l < pb; ++l) {
          const auto bkl = b.block(k, l);
          const Index row0 = (i * pb + k) * cell;
          const Index col0 = (j * pb + l) * cell;
          // Kronecker product aij (x) bkl
          for (Index r = 0; r < ma; ++r)
            for (Index c = 0; c < ma; ++c)
              out.block(row0 + r * mb, col0 + c * mb, mb, mb) = aij(r, c) * bkl;
        }
      }
    }
  }
  return out;
}

BlockMatrix symmetrize(const BlockMatrix& a) {
  Eigen::MatrixXd s = 0.5 * (a.dense() + a.dense().transpose());
  return BlockMatrix(std::move(s), a.block_size());
}

EdgeSet edges_from(const BlockMatrix& a, double threshold) {
  require(threshold >= 0.0, ErrorCode::InvalidArgument, "edge threshold must be nonnegative");
  const Index p = a.nodes();
  EdgeSet out(p);
  for (Index k = 0; k < p; ++k)
    for (Index l = k + 1; l < p; ++l)
      if (a.block_norm(k, l) > threshold || a.block_norm(l, k) > threshold) out.insert(k, l);
  return out;
}

}  // namespace diffgraph
