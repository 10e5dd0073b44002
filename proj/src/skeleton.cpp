#include "lfmm/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "lfmm/tree.hpp"

namespace lfmm {

namespace {

// Equispaced nodes on the four edges of the square ring with lower corner `lo`
// and `length` unit steps per edge, counterclockwise, corners included once.
std::vector<LatticePoint> square_ring(LatticePoint lo, std::int64_t length, int per_edge) {
  std::vector<LatticePoint> ring;
  if (length == 0) return {lo};
  const std::array<LatticePoint, 4> corner{LatticePoint{lo.m1, lo.m2}, LatticePoint{lo.m1 + length, lo.m2},
                                           LatticePoint{lo.m1 + length, lo.m2 + length},
                                           LatticePoint{lo.m1, lo.m2 + length}};
  const std::array<LatticePoint, 4> step{LatticePoint{1, 0}, LatticePoint{0, 1}, LatticePoint{-1, 0},
                                         LatticePoint{0, -1}};
  const bool all = per_edge <= 0 || length <= per_edge;
  const std::int64_t count = all ? length : per_edge;
  for (std::size_t e = 0; e < 4; ++e) {
    for (std::int64_t j = 0; j < count; ++j) {
      // Nearest lattice node to the equispaced position j * length / count.
      const std::int64_t t = all ? j : (2 * j * length + count) / (2 * count);
      ring.push_back({corner[e].m1 + step[e].m1 * t, corner[e].m2 + step[e].m2 * t});
    }
  }
  return ring;
}

}  // namespace

InterpolativeDecomposition interpolative_decomposition(const Eigen::MatrixXd& a, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error("interpolative_decomposition: eps must lie in (0, 1)");
  if (a.size() == 0 || !a.allFinite()) throw Error("interpolative_decomposition: empty or non-finite matrix");
  const double norm = a.norm();
  if (norm == 0.0) throw Error("interpolative_decomposition: zero matrix");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::Index cols = a.cols();
  const Eigen::Index steps = std::min(a.rows(), cols);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();

  // tail[k] = ||R(k:, k:)||_F^2 for the pivoted R.
  std::vector<double> tail(static_cast<std::size_t>(steps) + 1, 0.0);
  for (Eigen::Index k = steps - 1; k >= 0; --k) {
    tail[k] = tail[k + 1] + r.row(k).tail(cols - k).squaredNorm() + r.col(k).segment(k + 1, steps - k - 1).squaredNorm();
  }
  const double target = eps * eps * norm * norm;
  Eigen::Index rank = steps;
  for (Eigen::Index k = 1; k <= steps; ++k) {
    if (tail[k] <= target) {
      rank = k;
      break;
    }
  }

  const auto& perm = qr.colsPermutation().indices();
  InterpolativeDecomposition id;
  id.norm = norm;
  id.skeleton.resize(static_cast<std::size_t>(rank));
  for (Eigen::Index k = 0; k < rank; ++k) id.skeleton[static_cast<std::size_t>(k)] = perm[k];

  const auto r11 = r.topLeftCorner(rank, rank).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd coupling = r11.solve(r.topRightCorner(rank, cols - rank));
  id.interpolation.setZero(rank, cols);
  for (Eigen::Index k = 0; k < rank; ++k) id.interpolation(k, perm[k]) = 1.0;
  for (Eigen::Index j = 0; j < cols - rank; ++j) id.interpolation.col(perm[rank + j]) = coupling.col(j);

  Eigen::MatrixXd skel_cols(a.rows(), rank);
  for (Eigen::Index k = 0; k < rank; ++k) skel_cols.col(k) = a.col(perm[k]);
  id.residual = (a - skel_cols * id.interpolation).norm();
  return id;
}

ProxySurface proxy_surface(std::int64_t side, int per_edge) {
  if (side < 1) throw Error("proxy_surface: side must be positive");
  ProxySurface surface;
  surface.side = side;
  surface.points = square_ring({-side - 1, -side - 1}, 3 * side + 1, per_edge);
  return surface;
}

std::vector<LatticePoint> box_boundary(std::int64_t side, int per_edge) {
  if (side < 1) throw Error("box_boundary: side must be positive");
  return square_ring({0, 0}, side - 1, per_edge);
}

Eigen::MatrixXd kernel_matrix(std::span<const LatticePoint> targets, std::span<const LatticePoint> sources,
                              const GreensTable& table) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(targets.size()), static_cast<Eigen::Index>(sources.size()));
  for (std::size_t j = 0; j < sources.size(); ++j) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = phi(targets[i] - sources[j], table);
    }
  }
  return k;
}

SkeletonBuild build_level_skeleton(int level, std::int64_t side, const GreensTable& table, double eps,
                                   const Skeleton* child, int proxy_per_edge) {
  SkeletonBuild out;
  Skeleton& s = out.skeleton;
  s.level = level;
  s.side = side;
  if (child == nullptr) {
    if (side < kDenseLeafSide) {
      for (std::int64_t x = 0; x < side; ++x) {
        for (std::int64_t y = 0; y < side; ++y) s.candidates.push_back({x, y});
      }
    } else {
      s.candidates = box_boundary(side, kBoundaryCandidatesPerEdge);
    }
  } else {
    if (child->side * 2 != side) throw Error("build_level_skeleton: child side does not halve the parent");
    for (int c = 0; c < 4; ++c) {
      const LatticePoint shift = quadrant_offset(c, child->side);
      for (const auto& p : child->points) s.candidates.push_back(p + shift);
    }
  }

  const ProxySurface proxy = proxy_surface(side, proxy_per_edge);
  const Eigen::MatrixXd a = kernel_matrix(proxy.points, s.candidates, table);
  out.decomposition = interpolative_decomposition(a, eps);
  for (Eigen::Index j : out.decomposition.skeleton) {
    s.selected.push_back(static_cast<std::size_t>(j));
    s.points.push_back(s.candidates[static_cast<std::size_t>(j)]);
  }
  return out;
}

std::array<Eigen::MatrixXd, 4> build_T_ofo(const SkeletonBuild& parent, const Skeleton& child) {
  const Eigen::MatrixXd& s = parent.decomposition.interpolation;
  const auto k = static_cast<Eigen::Index>(child.rank());
  if (s.cols() != 4 * k) {
    throw Error("build_T_ofo: interpolation has " + std::to_string(s.cols()) + " columns, expected " +
                std::to_string(4 * k));
  }
  std::array<Eigen::MatrixXd, 4> blocks;
  for (int c = 0; c < 4; ++c) blocks[static_cast<std::size_t>(c)] = s.middleCols(c * k, k);
  return blocks;
}

std::vector<Eigen::MatrixXd> build_T_ifo(const Skeleton& skeleton, const GreensTable& table) {
  const auto& offsets = interaction_offsets();
  std::vector<Eigen::MatrixXd> out(offsets.size());
  const auto p = static_cast<Eigen::Index>(skeleton.rank());
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    const LatticePoint shift{offsets[j][0] * skeleton.side, offsets[j][1] * skeleton.side};
    Eigen::MatrixXd t(p, p);
    for (Eigen::Index q = 0; q < p; ++q) {
      const LatticePoint source = skeleton.points[static_cast<std::size_t>(q)] + shift;
      for (Eigen::Index r = 0; r < p; ++r) t(r, q) = phi(skeleton.points[static_cast<std::size_t>(r)] - source, table);
    }
    out[j] = std::move(t);
  }
  return out;
}

LeafSourceMap::LeafSourceMap(const Skeleton& skeleton, const GreensTable& table, int proxy_per_edge)
    : side_(skeleton.side), table_(&table), skeleton_points_(skeleton.points) {
  proxy_ = proxy_surface(side_, proxy_per_edge).points;
  qr_.compute(kernel_matrix(proxy_, skeleton_points_, table));
}

Eigen::VectorXd LeafSourceMap::column(const LatticePoint& local) const {
  const auto it = std::find(skeleton_points_.begin(), skeleton_points_.end(), local);
  if (it != skeleton_points_.end()) {
    return Eigen::VectorXd::Unit(rank(), static_cast<Eigen::Index>(it - skeleton_points_.begin()));
  }
  const LatticePoint one[1] = {local};
  return qr_.solve(kernel_matrix(proxy_, one, *table_));
}

Eigen::MatrixXd LeafSourceMap::matrix(std::span<const LatticePoint> locals) const {
  Eigen::MatrixXd t(rank(), static_cast<Eigen::Index>(locals.size()));
  for (std::size_t j = 0; j < locals.size(); ++j) t.col(static_cast<Eigen::Index>(j)) = column(locals[j]);
  return t;
}

double LeafSourceMap::fit_residual(const LatticePoint& local) const {
  const LatticePoint one[1] = {local};
  const Eigen::MatrixXd target = kernel_matrix(proxy_, one, *table_);
  const Eigen::MatrixXd fit = kernel_matrix(proxy_, skeleton_points_, *table_) * column(local);
  return (target - fit).norm() / target.norm();
}

std::size_t LevelOperators::stored_entries() const {
  std::size_t n = 0;
  for (const auto& m : ofo) n += static_cast<std::size_t>(m.size());
  for (const auto& m : ifo) n += static_cast<std::size_t>(m.size());
  return n;
}

std::size_t OperatorHierarchy::stored_entries() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.stored_entries();
  return n;
}

OperatorHierarchy build_operator_hierarchy(int leaf_level, std::int64_t leaf_side, int first_level,
                                           const GreensTable& table, const OperatorOptions& options) {
  if (first_level > leaf_level) throw Error("build_operator_hierarchy: first level below the leaves");
  OperatorHierarchy h;
  h.levels.resize(static_cast<std::size_t>(leaf_level) + 1);

  SkeletonBuild current = build_level_skeleton(leaf_level, leaf_side, table, options.eps, nullptr, options.proxy_per_edge);
  for (int level = leaf_level;; --level) {
    LevelOperators& ops = h.levels[static_cast<std::size_t>(level)];
    ops.level = level;
    ops.side = current.skeleton.side;
    ops.id_residual = current.decomposition.residual / current.decomposition.norm;
    ops.skeleton = current.skeleton;
    ops.ifo = build_T_ifo(ops.skeleton, table);
    if (level == leaf_level) h.leaf_map = LeafSourceMap(ops.skeleton, table, options.proxy_per_edge);
    if (level == first_level) break;

    SkeletonBuild parent = build_level_skeleton(level - 1, ops.side * 2, table, options.eps, &ops.skeleton,
                                                options.proxy_per_edge);
    h.levels[static_cast<std::size_t>(level - 1)].ofo = build_T_ofo(parent, ops.skeleton);
    current = std::move(parent);
  }
  return h;
}

}  // namespace lfmm
