#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "lfmm/tree.hpp"
#include "support.hpp"

using namespace lfmm;

namespace {

std::vector<LatticePoint> grid(std::int64_t n, LatticePoint origin = {}) {
  std::vector<LatticePoint> p;
  for (std::int64_t x = 0; x < n; ++x) {
    for (std::int64_t y = 0; y < n; ++y) p.push_back({origin.m1 + x, origin.m2 + y});
  }
  return p;
}

std::vector<BoxId> ids(std::initializer_list<BoxId> l) { return l; }

struct Dense3 {
  std::vector<LatticePoint> points = grid(8);
  QuadTree tree = QuadTree::build(points, 1);
  std::vector<BoxLists> lists = compute_lists(tree);
  const BoxLists& of(BoxId id) const { return lists[tree.index_of(id)]; }
};

}  // namespace

TEST_CASE("box numbering") {
  CHECK(box_id(0, 0, 0) == 1);
  CHECK(box_id(1, 0, 0) == 2);
  CHECK(box_id(1, 1, 1) == 5);
  for (BoxId t = 1; t < 100; ++t) {
    const BoxCoord c = box_coord(t);
    CHECK(box_id(c.level, c.ix, c.iy) == t);
    if (c.level < 4) {
      CHECK(box_id(c.level + 1, 2 * c.ix, 2 * c.iy) == 4 * t - 2);
      CHECK(box_id(c.level + 1, 2 * c.ix + 1, 2 * c.iy + 1) == 4 * t + 1);
    }
  }
}

TEST_CASE("depth selection") {
  CHECK(QuadTree::build(std::vector<LatticePoint>{{5, 5}}, 1).depth() == 0);
  const QuadTree four = QuadTree::build(grid(2), 1);
  CHECK(four.depth() == 1);
  CHECK(four.leaves().size() == 4);
  const QuadTree g16 = QuadTree::build(grid(16), 64);
  // Four leaves of 64 already meet the capacity.
  CHECK(g16.depth() == 1);
  for (std::size_t k : g16.leaves()) CHECK(g16.boxes()[k].points.size() == 64);
  CHECK(QuadTree::build(grid(16), 63).depth() == 2);
  // Brute force: the chosen depth is the first one that fits.
  const auto pts = testing::random_sources(300, 1000, 3).points;
  const QuadTree t = QuadTree::build(pts, 10);
  for (std::size_t k : t.leaves()) CHECK(t.boxes()[k].points.size() <= 10);
  if (t.depth() > 0) {
    std::map<std::pair<std::int64_t, std::int64_t>, int> count;
    const std::int64_t s = t.side(t.depth() - 1);
    int fullest = 0;
    for (const auto& p : pts) {
      fullest = std::max(fullest, ++count[{(p.m1 - t.origin().m1) / s, (p.m2 - t.origin().m2) / s}]);
    }
    CHECK(fullest > 10);
  }
}

TEST_CASE("tree build errors") {
  CHECK_THROWS_AS(QuadTree::build(std::vector<LatticePoint>{}, 4), Error);
  CHECK_THROWS_AS(QuadTree::build(std::vector<LatticePoint>{{1, 2}, {3, 4}, {1, 2}}, 4), Error);
  CHECK_THROWS_AS(QuadTree::build(std::vector<LatticePoint>{{1, 2}}, 0), Error);
}

TEST_CASE("root sizing and point partition") {
  const auto pts = testing::random_sources(500, 777, 5, {-300, 40}).points;
  const QuadTree t = QuadTree::build(pts, 16);
  CHECK(t.root_side() == 1024);
  CHECK(t.origin().m1 >= -300);
  for (int level = 0; level <= t.depth(); ++level) {
    std::vector<std::size_t> seen;
    for (std::size_t k : t.level(level)) {
      const TreeBox& b = t.boxes()[k];
      CHECK(b.side == t.root_side() >> level);
      for (std::size_t i : b.points) {
        CHECK(pts[i].m1 >= b.corner.m1);
        CHECK(pts[i].m1 < b.corner.m1 + b.side);
        CHECK(pts[i].m2 >= b.corner.m2);
        CHECK(pts[i].m2 < b.corner.m2 + b.side);
      }
      seen.insert(seen.end(), b.points.begin(), b.points.end());
      if (!b.is_leaf()) {
        std::vector<std::size_t> union_of_children;
        for (BoxId c : b.children) {
          const auto& cp = t.box(c).points;
          union_of_children.insert(union_of_children.end(), cp.begin(), cp.end());
        }
        std::sort(union_of_children.begin(), union_of_children.end());
        CHECK(union_of_children == b.points);
      }
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen.size() == pts.size());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  }
}

TEST_CASE("lists of the worked example") {
  const Dense3 d;
  REQUIRE(d.tree.depth() == 3);
  REQUIRE(d.tree.boxes().size() == 85);
  CHECK(d.of(14).children == ids({54, 55, 56, 57}));
  CHECK(d.of(23).neighbors == ids({22, 24, 25, 26, 28}));
  CHECK(d.of(7).interaction == ids({11, 13, 14, 15, 16, 17, 18, 19, 20, 21}));
  CHECK(d.of(1).interaction.empty());
  for (BoxId id = 2; id <= 5; ++id) CHECK(d.of(id).interaction.empty());
}

TEST_CASE("list invariants on a dense three-level tree") {
  const Dense3 d;
  const auto& boxes = d.tree.boxes();
  std::size_t largest = 0;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const TreeBox& tau = boxes[k];
    CHECK(d.lists[k].neighbors.size() <= 8);
    largest = std::max(largest, d.lists[k].interaction.size());
    for (BoxId s : d.lists[k].neighbors) {
      const auto& back = d.of(s).neighbors;
      CHECK(std::find(back.begin(), back.end(), tau.id) != back.end());
    }
    for (BoxId s : d.lists[k].interaction) {
      const TreeBox& sigma = d.tree.box(s);
      CHECK(sigma.level == tau.level);
      CHECK(std::max(std::llabs(sigma.ix - tau.ix), std::llabs(sigma.iy - tau.iy)) >= 2);
      const TreeBox& pt = d.tree.box(tau.parent);
      const TreeBox& ps = d.tree.box(sigma.parent);
      CHECK(std::max(std::llabs(pt.ix - ps.ix), std::llabs(pt.iy - ps.iy)) <= 1);
      // Well separated: sigma lies outside the 3x3 block of boxes around tau.
      const LatticePoint d2 = sigma.doubled_center() - tau.doubled_center();
      CHECK(std::max(std::llabs(d2.m1), std::llabs(d2.m2)) >= 4 * tau.side);
      const auto& back = d.of(s).interaction;
      CHECK(std::find(back.begin(), back.end(), tau.id) != back.end());
    }
  }
  CHECK(largest == 27);
}

TEST_CASE("near and far fields partition all source-target pairs") {
  const Dense3 d;
  const auto& boxes = d.tree.boxes();
  const std::size_t n = d.points.size();
  for (std::size_t leaf : d.tree.leaves()) {
    const std::size_t target = boxes[leaf].points.at(0);
    std::vector<int> hits(n, 0);
    for (std::size_t j : boxes[leaf].points) ++hits[j];
    for (BoxId s : d.lists[leaf].neighbors) {
      for (std::size_t j : d.tree.box(s).points) ++hits[j];
    }
    for (BoxId a = boxes[leaf].id; a != 0; a = d.tree.box(a).parent) {
      for (BoxId s : d.of(a).interaction) {
        for (std::size_t j : d.tree.box(s).points) ++hits[j];
      }
    }
    INFO("target " << target);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("interaction offsets") {
  const auto& offsets = interaction_offsets();
  CHECK(offsets.size() == 40);
  CHECK(std::is_sorted(offsets.begin(), offsets.end()));
  for (const auto& o : offsets) {
    const int m = std::max(std::abs(o[0]), std::abs(o[1]));
    CHECK((m == 2 || m == 3));
  }

  // Every interaction pair of a dense tree hits a listed offset, and all 40 occur.
  const Dense3 d;
  std::set<std::size_t> used;
  for (std::size_t k = 0; k < d.tree.boxes().size(); ++k) {
    const TreeBox& tau = d.tree.boxes()[k];
    for (BoxId s : d.lists[k].interaction) {
      const TreeBox& sigma = d.tree.box(s);
      const std::size_t j = relative_ifo_offset(tau, sigma);
      REQUIRE(j < offsets.size());
      CHECK(offsets[j][0] == sigma.ix - tau.ix);
      CHECK(offsets[j][1] == sigma.iy - tau.iy);
      CHECK(relative_ifo_offset(sigma, tau) == offsets.size() - 1 - j);
      used.insert(j);
    }
  }
  CHECK(used.size() == 40);
  CHECK_THROWS_AS(relative_ifo_offset(d.tree.box(23), d.tree.box(24)), Error);
}

TEST_CASE("sparse trees keep only occupied boxes") {
  const std::vector<LatticePoint> pts{{0, 0}, {1, 0}, {1000, 1000}};
  const QuadTree t = QuadTree::build(pts, 1);
  CHECK(t.depth() == 10);
  for (int level = 0; level <= t.depth(); ++level) CHECK(t.level(level).size() <= 3);
  CHECK(t.find(t.depth(), 500, 500) == QuadTree::npos);
}

TEST_CASE("dump format") {
  const QuadTree t = QuadTree::build(grid(2, {-1, -1}), 1);
  const auto lists = compute_lists(t);
  std::ostringstream os;
  dump_tree(os, t, lists);
  std::istringstream in(os.str());
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(first == "1 0 -0.5 -0.5 2 0 [2,3,4,5] [] []");
  CHECK(second == "2 1 -1 -1 1 1 [] [3,4,5] []");
}
