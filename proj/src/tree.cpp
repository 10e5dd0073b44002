#include "lfmm/tree.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <ostream>

namespace lfmm {

namespace {

std::uint64_t interleave(std::uint64_t x, std::uint64_t y, int bits) {
  std::uint64_t key = 0;
  for (int b = 0; b < bits; ++b) {
    key |= ((x >> b) & 1u) << (2 * b + 1);
    key |= ((y >> b) & 1u) << (2 * b);
  }
  return key;
}

BoxId level_base(int level) { return ((BoxId{1} << (2 * level)) - 1) / 3 + 1; }

bool adjacent(std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by) {
  return std::llabs(ax - bx) <= 1 && std::llabs(ay - by) <= 1;
}

std::int64_t floor_half(std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

void write_list(std::ostream& os, const std::vector<BoxId>& ids) {
  os << '[';
  for (std::size_t k = 0; k < ids.size(); ++k) os << (k ? "," : "") << ids[k];
  os << ']';
}

void write_half(std::ostream& os, std::int64_t doubled) {
  if (doubled < 0) os << '-';
  const std::int64_t magnitude = std::llabs(doubled);
  os << magnitude / 2;
  if (magnitude % 2 != 0) os << ".5";
}

}  // namespace

BoxId box_id(int level, std::int64_t ix, std::int64_t iy) {
  return level_base(level) + static_cast<BoxId>(interleave(static_cast<std::uint64_t>(ix),
                                                           static_cast<std::uint64_t>(iy), level));
}

BoxCoord box_coord(BoxId id) {
  if (id < 1) throw Error("box_coord: ids start at 1");
  int level = 0;
  while (level_base(level + 1) <= id) ++level;
  auto key = static_cast<std::uint64_t>(id - level_base(level));
  BoxCoord c{level, 0, 0};
  for (int b = 0; b < level; ++b) {
    c.ix |= static_cast<std::int64_t>((key >> (2 * b + 1)) & 1u) << b;
    c.iy |= static_cast<std::int64_t>((key >> (2 * b)) & 1u) << b;
  }
  return c;
}

QuadTree QuadTree::build(std::span<const LatticePoint> points, std::size_t leaf_capacity) {
  if (points.empty()) throw Error("build_tree: empty point set");
  if (leaf_capacity < 1) throw Error("build_tree: leaf capacity must be at least 1");

  std::int64_t xmin = points[0].m1, xmax = xmin, ymin = points[0].m2, ymax = ymin;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.m1);
    xmax = std::max(xmax, p.m1);
    ymin = std::min(ymin, p.m2);
    ymax = std::max(ymax, p.m2);
  }
  const auto extent = static_cast<std::uint64_t>(std::max(xmax - xmin, ymax - ymin) + 1);
  if (extent > (std::uint64_t{1} << 31)) throw Error("build_tree: domain wider than 2^31 nodes");

  QuadTree tree;
  tree.origin_ = {xmin, ymin};
  tree.root_side_ = static_cast<std::int64_t>(std::bit_ceil(extent));
  tree.point_count_ = points.size();
  const int max_depth = std::countr_zero(static_cast<std::uint64_t>(tree.root_side_));

  std::vector<std::uint64_t> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    keys[i] = interleave(static_cast<std::uint64_t>(points[i].m1 - xmin),
                         static_cast<std::uint64_t>(points[i].m2 - ymin), max_depth);
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (keys[order[k]] == keys[order[k - 1]]) {
      throw Error("build_tree: duplicate lattice point " + to_string(points[order[k]]));
    }
  }

  auto prefix = [&](std::size_t i, int level) { return keys[i] >> (2 * (max_depth - level)); };

  // Smallest depth whose fullest leaf respects the capacity.
  int depth = 0;
  for (;; ++depth) {
    std::size_t fullest = 0, run = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      run = (k > 0 && prefix(order[k], depth) == prefix(order[k - 1], depth)) ? run + 1 : 1;
      fullest = std::max(fullest, run);
    }
    if (fullest <= leaf_capacity || depth == max_depth) break;
  }
  tree.depth_ = depth;
  tree.levels_.resize(static_cast<std::size_t>(depth) + 1);

  for (int level = 0; level <= depth; ++level) {
    const std::int64_t side = tree.side(level);
    std::size_t begin = 0;
    while (begin < order.size()) {
      std::size_t end = begin + 1;
      const std::uint64_t key = prefix(order[begin], level);
      while (end < order.size() && prefix(order[end], level) == key) ++end;

      TreeBox box;
      box.level = level;
      for (int b = 0; b < level; ++b) {
        box.ix |= static_cast<std::int64_t>((key >> (2 * b + 1)) & 1u) << b;
        box.iy |= static_cast<std::int64_t>((key >> (2 * b)) & 1u) << b;
      }
      box.id = level_base(level) + static_cast<BoxId>(key);
      box.side = side;
      box.corner = {xmin + box.ix * side, ymin + box.iy * side};
      box.parent = level == 0 ? 0 : box_id(level - 1, box.ix / 2, box.iy / 2);
      box.points.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                        order.begin() + static_cast<std::ptrdiff_t>(end));
      std::sort(box.points.begin(), box.points.end());

      tree.index_.emplace(box.id, tree.boxes_.size());
      tree.levels_[static_cast<std::size_t>(level)].push_back(tree.boxes_.size());
      if (level > 0) tree.boxes_[tree.index_.at(box.parent)].children.push_back(box.id);
      tree.boxes_.push_back(std::move(box));
      begin = end;
    }
  }
  return tree;
}

std::size_t QuadTree::index_of(BoxId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw Error("no box with id " + std::to_string(id));
  return it->second;
}

std::size_t QuadTree::find(int level, std::int64_t ix, std::int64_t iy) const {
  if (level < 0 || level > depth_) return npos;
  const std::int64_t n = std::int64_t{1} << level;
  if (ix < 0 || iy < 0 || ix >= n || iy >= n) return npos;
  const auto it = index_.find(box_id(level, ix, iy));
  return it == index_.end() ? npos : it->second;
}

bool in_interaction_list(const TreeBox& tau, const TreeBox& sigma) {
  if (tau.level != sigma.level || tau.level < 1) return false;
  if (adjacent(tau.ix, tau.iy, sigma.ix, sigma.iy)) return false;
  return adjacent(floor_half(tau.ix), floor_half(tau.iy), floor_half(sigma.ix), floor_half(sigma.iy));
}

std::vector<BoxLists> compute_lists(const QuadTree& tree) {
  std::vector<BoxLists> lists(tree.boxes().size());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < tree.boxes().size(); ++k) {
    const TreeBox& tau = tree.boxes()[k];
    BoxLists& out = lists[k];
    out.children = tau.children;
    for (std::int64_t dx = -3; dx <= 3; ++dx) {
      for (std::int64_t dy = -3; dy <= 3; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const std::size_t pos = tree.find(tau.level, tau.ix + dx, tau.iy + dy);
        if (pos == QuadTree::npos) continue;
        const TreeBox& sigma = tree.boxes()[pos];
        if (adjacent(tau.ix, tau.iy, sigma.ix, sigma.iy)) {
          out.neighbors.push_back(sigma.id);
        } else if (in_interaction_list(tau, sigma)) {
          out.interaction.push_back(sigma.id);
        }
      }
    }
    std::sort(out.neighbors.begin(), out.neighbors.end());
    std::sort(out.interaction.begin(), out.interaction.end());
  }
  return lists;
}

const std::vector<std::array<int, 2>>& interaction_offsets() {
  static const std::vector<std::array<int, 2>> offsets = [] {
    // A child at (cx, cy) of a parent whose whole neighborhood exists.
    std::vector<std::array<int, 2>> found;
    for (int cx = 0; cx <= 1; ++cx) {
      for (int cy = 0; cy <= 1; ++cy) {
        for (int px = -1; px <= 1; ++px) {
          for (int py = -1; py <= 1; ++py) {
            for (int sx = 0; sx <= 1; ++sx) {
              for (int sy = 0; sy <= 1; ++sy) {
                const int dx = 2 * px + sx - cx;
                const int dy = 2 * py + sy - cy;
                if (std::abs(dx) <= 1 && std::abs(dy) <= 1) continue;
                found.push_back({dx, dy});
              }
            }
          }
        }
      }
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    return found;
  }();
  return offsets;
}

std::size_t relative_ifo_offset(const TreeBox& tau, const TreeBox& sigma) {
  if (!in_interaction_list(tau, sigma)) {
    throw Error("box " + std::to_string(sigma.id) + " is not in the interaction list of " + std::to_string(tau.id));
  }
  const std::array<int, 2> d{static_cast<int>(sigma.ix - tau.ix), static_cast<int>(sigma.iy - tau.iy)};
  const auto& offsets = interaction_offsets();
  const auto it = std::lower_bound(offsets.begin(), offsets.end(), d);
  return static_cast<std::size_t>(it - offsets.begin());
}

void dump_tree(std::ostream& os, const QuadTree& tree, const std::vector<BoxLists>& lists) {
  for (std::size_t k = 0; k < tree.boxes().size(); ++k) {
    const TreeBox& b = tree.boxes()[k];
    const LatticePoint c = b.doubled_center();
    os << b.id << ' ' << b.level << ' ';
    write_half(os, c.m1);
    os << ' ';
    write_half(os, c.m2);
    os << ' ' << b.side << ' ' << b.parent << ' ';
    write_list(os, lists[k].children);
    os << ' ';
    write_list(os, lists[k].neighbors);
    os << ' ';
    write_list(os, lists[k].interaction);
    os << '\n';
  }
}

}  // namespace lfmm
