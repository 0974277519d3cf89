#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

namespace diffgraph {

using Index = Eigen::Index;

/// Square dense matrix of side m*p partitioned into p x p blocks of size m x m.
///
/// Block (k, l) (0-based) covers rows k*m .. k*m+m-1 and columns l*m .. l*m+m-1.
/// Storage is the underlying Eigen matrix; block views are computed on demand.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(Eigen::MatrixXd data, Index block_size);

  static BlockMatrix zeros(Index block_size, Index nodes);
  static BlockMatrix identity(Index block_size, Index nodes);

  Index block_size() const noexcept { return m_; }
  Index nodes() const noexcept { return p_; }
  Index side() const noexcept { return m_ * p_; }
  bool empty() const noexcept { return p_ == 0; }

  const Eigen::MatrixXd& dense() const noexcept { return data_; }
  Eigen::MatrixXd& dense() noexcept { return data_; }

  auto block(Index k, Index l) const { return data_.block(k * m_, l * m_, m_, m_); }
  auto block(Index k, Index l) { return data_.block(k * m_, l * m_, m_, m_); }

  double block_norm(Index k, Index l) const { return block(k, l).norm(); }

  bool same_layout(const BlockMatrix& other) const noexcept {
    return m_ == other.m_ && p_ == other.p_;
  }

 private:
  Eigen::MatrixXd data_;
  Index m_ = 0;
  Index p_ = 0;
};

/// Unordered node pairs {k, l}, stored canonically as (min, max).
class EdgeSet {
 public:
  using Edge = std::pair<Index, Index>;

  EdgeSet() = default;
  explicit EdgeSet(Index nodes, bool allow_self_loops = false)
      : p_(nodes), allow_self_(allow_self_loops) {}

  void insert(Index k, Index l);
  bool contains(Index k, Index l) const;
  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }
  Index nodes() const noexcept { return p_; }

  auto begin() const { return edges_.begin(); }
  auto end() const { return edges_.end(); }
  std::vector<Edge> to_vector() const { return {edges_.begin(), edges_.end()}; }

  bool operator==(const EdgeSet& other) const { return p_ == other.p_ && edges_ == other.edges_; }

 private:
  std::set<Edge> edges_;
  Index p_ = 0;
  bool allow_self_ = false;
};

/// p x p matrix of block Frobenius norms.
Eigen::MatrixXd block_norms(const BlockMatrix& a);

/// Concatenation of vec(A^(k,l)) in column-block-major order: (1,1), (2,1), ..., (p,1), (1,2), ...
Eigen::VectorXd bvec(const BlockMatrix& a);
BlockMatrix bvec_inverse(const Eigen::VectorXd& v, Index block_size, Index nodes);

/// Position of block (k, l) inside bvec, in units of m*m entries.
inline Index bvec_block_index(Index k, Index l, Index nodes) { return l * nodes + k; }

inline constexpr Index kDefaultTracySinghCap = 4096;

/// Tracy-Singh product: block ((i,k),(j,l)) equals A_ij (x) B_kl, with the outer index from A.
/// Rejects results whose side would exceed `cap`.
Eigen::MatrixXd tracy_singh(const BlockMatrix& a, const BlockMatrix& b,
                            Index cap = kDefaultTracySinghCap);

BlockMatrix symmetrize(const BlockMatrix& a);

/// Off-diagonal node pairs whose block norm strictly exceeds `threshold`.
EdgeSet edges_from(const BlockMatrix& a, double threshold = 0.0);

}  // namespace diffgraph
