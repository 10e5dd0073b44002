#pragma once

// Skeletonization of model boxes and the translation operators built on it.
//
// Every box on a level is an integer translate of one model box whose lower
// corner sits at the origin, so skeletons and operators are built once per
// level in local coordinates and reused everywhere.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lfmm/green.hpp"
#include "lfmm/lattice.hpp"

namespace lfmm {

/// A ~ A(:, skeleton) * interpolation, with interpolation(:, skeleton) = I.
struct InterpolativeDecomposition {
  std::vector<Eigen::Index> skeleton;  // column indices in pivot order
  Eigen::MatrixXd interpolation;       // rank x cols
  double residual = 0.0;               // ||A - A(:, skeleton) * interpolation||_F
  double norm = 0.0;                   // ||A||_F

  Eigen::Index rank() const { return static_cast<Eigen::Index>(skeleton.size()); }
};

/// Column-pivoted QR truncated at the smallest rank whose trailing block has
/// Frobenius norm <= eps * ||A||_F.  Throws on a zero or non-finite matrix.
InterpolativeDecomposition interpolative_decomposition(const Eigen::MatrixXd& a, double eps);

inline constexpr int kDefaultProxyPerEdge = 40;

/// Proxy nodes on the square ring at max-norm distance side+1 outside a box of
/// the given side with lower corner at the origin.  Every node on or outside
/// the ring is well separated from the box.  When the ring has more than
/// 4 * per_edge nodes it is subsampled to per_edge equispaced nodes per edge.
struct ProxySurface {
  std::int64_t side = 0;
  std::vector<LatticePoint> points;
};
ProxySurface proxy_surface(std::int64_t side, int per_edge = kDefaultProxyPerEdge);

/// Lattice nodes on the boundary of a box of the given side, counterclockwise
/// from the corner, subsampled to at most per_edge nodes per edge (0 keeps all).
std::vector<LatticePoint> box_boundary(std::int64_t side, int per_edge = 0);

/// Kernel matrix phi(targets_i - sources_j).
Eigen::MatrixXd kernel_matrix(std::span<const LatticePoint> targets, std::span<const LatticePoint> sources,
                              const GreensTable& table);

struct Skeleton {
  int level = 0;
  std::int64_t side = 0;
  std::vector<LatticePoint> candidates;  // Y, local coordinates
  std::vector<std::size_t> selected;     // indices into candidates
  std::vector<LatticePoint> points;      // the skeleton, candidates[selected[p]]

  std::size_t rank() const { return points.size(); }
};

/// Leaf boxes narrower than this use every lattice node of the box as a
/// skeleton candidate; wider leaves use boundary nodes.
inline constexpr std::int64_t kDenseLeafSide = 8;
/// Boundary candidates kept per edge of a wide leaf.
inline constexpr int kBoundaryCandidatesPerEdge = 64;

struct SkeletonBuild {
  Skeleton skeleton;
  InterpolativeDecomposition decomposition;  // of the proxy matrix A^{F,Y}
};

/// Skeleton for a model box of `side`.  Without a child skeleton the
/// candidates are leaf candidates; otherwise they are the four child
/// skeletons shifted into the quadrants, concatenated in child order.
SkeletonBuild build_level_skeleton(int level, std::int64_t side, const GreensTable& table, double eps,
                                   const Skeleton* child, int proxy_per_edge = kDefaultProxyPerEdge);

/// Offset of child quadrant c = 2*xbit + ybit inside a parent of side 2*child_side.
inline LatticePoint quadrant_offset(int c, std::int64_t child_side) {
  return {(c >> 1) * child_side, (c & 1) * child_side};
}

/// Split the parent interpolation matrix into the four outgoing-from-outgoing
/// blocks.  Throws if the column count is not 4 * child rank.
std::array<Eigen::MatrixXd, 4> build_T_ofo(const SkeletonBuild& parent, const Skeleton& child);

/// Incoming-from-outgoing matrices for every interaction offset:
/// T[p][q] = phi(yhat_p - yhat_q - offset * side).
std::vector<Eigen::MatrixXd> build_T_ifo(const Skeleton& skeleton, const GreensTable& table);

/// Maps sources at arbitrary local positions of a leaf model box to its
/// outgoing expansion by least squares against the proxy surface.  Skeleton
/// nodes map to unit vectors exactly.
class LeafSourceMap {
 public:
  LeafSourceMap() = default;
  LeafSourceMap(const Skeleton& skeleton, const GreensTable& table, int proxy_per_edge = kDefaultProxyPerEdge);

  std::int64_t side() const { return side_; }
  Eigen::Index rank() const { return static_cast<Eigen::Index>(skeleton_points_.size()); }

  /// Column of T_ofs for a source at `local`.
  Eigen::VectorXd column(const LatticePoint& local) const;

  /// T_ofs for a list of local source positions (P x n).
  Eigen::MatrixXd matrix(std::span<const LatticePoint> locals) const;

  /// Relative proxy residual of the column for `local`.
  double fit_residual(const LatticePoint& local) const;

 private:
  std::int64_t side_ = 0;
  const GreensTable* table_ = nullptr;
  std::vector<LatticePoint> proxy_;
  std::vector<LatticePoint> skeleton_points_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

/// Everything the summation needs on one level.
struct LevelOperators {
  int level = 0;
  std::int64_t side = 0;
  Skeleton skeleton;
  double id_residual = 0.0;  // relative, of this level's decomposition
  std::array<Eigen::MatrixXd, 4> ofo;  // child -> this level; empty on the leaf level
  std::vector<Eigen::MatrixXd> ifo;    // per interaction offset

  /// Incoming-to-incoming for child quadrant c: the adjoint of ofo[c].
  auto ifi(int c) const { return ofo[static_cast<std::size_t>(c)].transpose(); }

  std::size_t stored_entries() const;
};

struct OperatorOptions {
  double eps = 1e-10;
  int proxy_per_edge = kDefaultProxyPerEdge;
};

/// Operators for levels [first_level, leaf_level], indexed by level.  Entries
/// below first_level are left default-constructed.  The leaf source map is
/// returned separately.
struct OperatorHierarchy {
  std::vector<LevelOperators> levels;
  LeafSourceMap leaf_map;

  std::size_t stored_entries() const;
};
OperatorHierarchy build_operator_hierarchy(int leaf_level, std::int64_t leaf_side, int first_level,
                                           const GreensTable& table, const OperatorOptions& options);

}  // namespace lfmm
