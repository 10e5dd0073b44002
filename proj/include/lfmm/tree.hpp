#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "lfmm/lattice.hpp"

namespace lfmm {

/// Breadth-first box number: root = 1, the children of box t are
/// 4t-2 .. 4t+1 ordered (x low, y low), (x low, y high), (x high, y low),
/// (x high, y high).
using BoxId = std::int64_t;

BoxId box_id(int level, std::int64_t ix, std::int64_t iy);

struct BoxCoord {
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;
};
BoxCoord box_coord(BoxId id);

struct TreeBox {
  BoxId id = 1;
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  LatticePoint corner;  // lowest lattice node covered
  std::int64_t side = 1;  // lattice nodes per side
  BoxId parent = 0;  // 0 for the root
  std::vector<BoxId> children;  // non-empty children only
  std::vector<std::size_t> points;  // J^tau, indices into the input point list

  /// Twice the geometric center (the center lies on a half-integer grid).
  LatticePoint doubled_center() const { return {2 * corner.m1 + side - 1, 2 * corner.m2 + side - 1}; }
  bool is_leaf() const { return children.empty(); }
};

/// Uniform quadtree over the bounding square of a point set.  Only boxes
/// holding at least one point are materialized, so the depth is free to
/// follow the leaf capacity even for very sparse points.
class QuadTree {
 public:
  static QuadTree build(std::span<const LatticePoint> points, std::size_t leaf_capacity);

  int depth() const { return depth_; }
  LatticePoint origin() const { return origin_; }
  std::int64_t root_side() const { return root_side_; }
  std::int64_t side(int level) const { return root_side_ >> level; }

  const std::vector<TreeBox>& boxes() const { return boxes_; }
  /// Positions in boxes() of the boxes on one level, ascending by id.
  std::span<const std::size_t> level(int l) const { return levels_[static_cast<std::size_t>(l)]; }
  std::span<const std::size_t> leaves() const { return level(depth_); }

  bool contains(BoxId id) const { return index_.contains(id); }
  std::size_t index_of(BoxId id) const;
  const TreeBox& box(BoxId id) const { return boxes_[index_of(id)]; }
  /// Position of the box at (level, ix, iy), or npos if empty/outside.
  std::size_t find(int level, std::int64_t ix, std::int64_t iy) const;

  std::size_t point_count() const { return point_count_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  int depth_ = 0;
  LatticePoint origin_;
  std::int64_t root_side_ = 1;
  std::size_t point_count_ = 0;
  std::vector<TreeBox> boxes_;
  std::vector<std::vector<std::size_t>> levels_;
  std::unordered_map<BoxId, std::size_t> index_;
};

struct BoxLists {
  std::vector<BoxId> children;
  std::vector<BoxId> neighbors;
  std::vector<BoxId> interaction;
};

/// Lists for every box, aligned with tree.boxes().
std::vector<BoxLists> compute_lists(const QuadTree& tree);

/// All distinct interaction-list offsets (in box sides), row-major over
/// (dx, dy).  Computed by enumeration over the four child positions.
const std::vector<std::array<int, 2>>& interaction_offsets();

/// Index into interaction_offsets() of sigma relative to tau.  Throws if sigma
/// is not in tau's interaction list.
std::size_t relative_ifo_offset(const TreeBox& tau, const TreeBox& sigma);

/// Same-level boxes that are not adjacent but have adjacent (or equal) parents.
bool in_interaction_list(const TreeBox& tau, const TreeBox& sigma);

/// Text dump, one line per box: id level cx cy side parent [children] [nei] [int]
void dump_tree(std::ostream& os, const QuadTree& tree, const std::vector<BoxLists>& lists);

}  // namespace lfmm
