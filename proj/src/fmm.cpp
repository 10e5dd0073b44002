#include "lfmm/fmm.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace lfmm {

namespace {

// Leaves up to this side cache source-map columns by local position.
constexpr std::int64_t kColumnCacheSide = 64;

int child_quadrant(const TreeBox& child) { return static_cast<int>(2 * (child.ix & 1) + (child.iy & 1)); }

}  // namespace

FmmPlan::FmmPlan(std::vector<LatticePoint> points, const GreensTable& table, const FmmOptions& options)
    : points_(std::move(points)), table_(&table), options_(options) {
  if (!(options_.eps > 0.0 && options_.eps < 1.0)) throw Error("fmm: eps must lie in (0, 1)");
  tree_ = QuadTree::build(points_, options_.leaf_capacity);
  lists_ = compute_lists(tree_);
  const auto& boxes = tree_.boxes();
  const int depth = tree_.depth();

  leaf_.resize(boxes.size());
  for (std::size_t k : tree_.leaves()) {
    for (BoxId id : lists_[k].neighbors) leaf_[k].near.push_back(tree_.index_of(id));
    leaf_[k].near.push_back(k);
  }
  if (!has_far_field()) return;

  ops_ = build_operator_hierarchy(depth, tree_.side(depth), 2, table, {options_.eps, options_.proxy_per_edge});

  far_.resize(boxes.size());
  for (int level = 2; level <= depth; ++level) {
    for (std::size_t k : tree_.level(level)) {
      for (BoxId id : lists_[k].interaction) {
        const std::size_t s = tree_.index_of(id);
        far_[k].sources.push_back(s);
        far_[k].offsets.push_back(relative_ifo_offset(boxes[k], boxes[s]));
      }
    }
  }

  const LeafSourceMap& map = ops_.leaf_map;
  const bool cache = tree_.side(depth) <= kColumnCacheSide;
  std::unordered_map<LatticePoint, Eigen::VectorXd, LatticePointHash> columns;
  for (std::size_t k : tree_.leaves()) {
    const TreeBox& box = boxes[k];
    Eigen::MatrixXd& t = leaf_[k].t_ofs;
    t.resize(map.rank(), static_cast<Eigen::Index>(box.points.size()));
    for (std::size_t j = 0; j < box.points.size(); ++j) {
      const LatticePoint local = points_[box.points[j]] - box.corner;
      if (cache) {
        auto it = columns.find(local);
        if (it == columns.end()) it = columns.emplace(local, map.column(local)).first;
        t.col(static_cast<Eigen::Index>(j)) = it->second;
      } else {
        t.col(static_cast<Eigen::Index>(j)) = map.column(local);
      }
    }
  }
}

std::vector<double> FmmPlan::apply(std::span<const double> charges) const {
  if (charges.size() != points_.size()) throw Error("fmm: charge count does not match the point count");
  const auto& boxes = tree_.boxes();
  const auto leaves = tree_.leaves();
  const int depth = tree_.depth();
  std::vector<double> u(points_.size(), 0.0);

  if (has_far_field()) {
    std::vector<Eigen::VectorXd> qhat(boxes.size()), uhat(boxes.size());

    // Sources to outgoing on the leaves.
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t n = 0; n < leaves.size(); ++n) {
      const std::size_t k = leaves[n];
      Eigen::VectorXd q(static_cast<Eigen::Index>(boxes[k].points.size()));
      for (std::size_t j = 0; j < boxes[k].points.size(); ++j) q[static_cast<Eigen::Index>(j)] = charges[boxes[k].points[j]];
      qhat[k] = leaf_[k].t_ofs * q;
    }

    // Outgoing to outgoing, fine to coarse.
    for (int level = depth - 1; level >= 2; --level) {
      const LevelOperators& ops = ops_.levels[static_cast<std::size_t>(level)];
      const auto ids = tree_.level(level);
#pragma omp parallel for schedule(dynamic, 16)
      for (std::size_t n = 0; n < ids.size(); ++n) {
        const std::size_t k = ids[n];
        qhat[k] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ops.skeleton.rank()));
        for (BoxId id : boxes[k].children) {
          const std::size_t c = tree_.index_of(id);
          qhat[k].noalias() += ops.ofo[static_cast<std::size_t>(child_quadrant(boxes[c]))] * qhat[c];
        }
      }
    }

    // Outgoing to incoming across interaction lists.
    for (int level = 2; level <= depth; ++level) {
      const LevelOperators& ops = ops_.levels[static_cast<std::size_t>(level)];
      const auto ids = tree_.level(level);
#pragma omp parallel for schedule(dynamic, 16)
      for (std::size_t n = 0; n < ids.size(); ++n) {
        const std::size_t k = ids[n];
        uhat[k] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ops.skeleton.rank()));
        for (std::size_t j = 0; j < far_[k].sources.size(); ++j) {
          uhat[k].noalias() += ops.ifo[far_[k].offsets[j]] * qhat[far_[k].sources[j]];
        }
      }
    }

    // Incoming to incoming, coarse to fine.
    for (int level = 2; level < depth; ++level) {
      const LevelOperators& ops = ops_.levels[static_cast<std::size_t>(level)];
      const auto ids = tree_.level(level);
#pragma omp parallel for schedule(dynamic, 16)
      for (std::size_t n = 0; n < ids.size(); ++n) {
        const std::size_t k = ids[n];
        for (BoxId id : boxes[k].children) {
          const std::size_t c = tree_.index_of(id);
          uhat[c].noalias() += ops.ifi(child_quadrant(boxes[c])) * uhat[k];
        }
      }
    }

    // Incoming to targets.
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t n = 0; n < leaves.size(); ++n) {
      const std::size_t k = leaves[n];
      const Eigen::VectorXd v = leaf_[k].t_ofs.transpose() * uhat[k];
      for (std::size_t j = 0; j < boxes[k].points.size(); ++j) u[boxes[k].points[j]] = v[static_cast<Eigen::Index>(j)];
    }
  }

  // Near field: the leaf itself and its neighbors.  phi(0) = 0 takes care of i = j.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t n = 0; n < leaves.size(); ++n) {
    const std::size_t k = leaves[n];
    for (std::size_t i : boxes[k].points) {
      double sum = 0.0;
      for (std::size_t s : leaf_[k].near) {
        for (std::size_t j : boxes[s].points) sum += phi(points_[i] - points_[j], *table_) * charges[j];
      }
      u[i] += sum;
    }
  }
  return u;
}

std::size_t FmmPlan::stored_entries() const {
  std::size_t n = ops_.stored_entries();
  for (const auto& l : leaf_) n += static_cast<std::size_t>(l.t_ofs.size());
  return n;
}

std::vector<double> direct_near_field(const QuadTree& tree, const std::vector<BoxLists>& lists,
                                      std::span<const LatticePoint> points, std::span<const double> charges,
                                      const GreensTable& table, const TreeBox& leaf) {
  if (!leaf.is_leaf() || leaf.level != tree.depth()) throw Error("direct_near_field: box is not a leaf");
  const std::size_t k = tree.index_of(leaf.id);
  std::vector<std::size_t> near{k};
  for (BoxId id : lists[k].neighbors) near.push_back(tree.index_of(id));
  std::vector<double> u;
  u.reserve(leaf.points.size());
  for (std::size_t i : leaf.points) {
    double sum = 0.0;
    for (std::size_t s : near) {
      for (std::size_t j : tree.boxes()[s].points) sum += phi(points[i] - points[j], table) * charges[j];
    }
    u.push_back(sum);
  }
  return u;
}

std::vector<double> fmm_apply(const SourceSet& sources, const GreensTable& table, const FmmOptions& options) {
  sources.validate();
  const FmmPlan plan(sources.points, table, options);
  return plan.apply(sources.charges);
}

std::vector<double> fmm_evaluate(const SourceSet& sources, std::span<const LatticePoint> targets,
                                 const GreensTable& table, const FmmOptions& options) {
  sources.validate();
  std::unordered_map<LatticePoint, std::size_t, LatticePointHash> where;
  std::vector<LatticePoint> points = sources.points;
  std::vector<double> charges = sources.charges;
  for (std::size_t i = 0; i < points.size(); ++i) where.emplace(points[i], i);
  for (const auto& t : targets) {
    if (where.emplace(t, points.size()).second) {
      points.push_back(t);
      charges.push_back(0.0);
    }
  }
  const FmmPlan plan(std::move(points), table, options);
  const std::vector<double> all = plan.apply(charges);
  std::vector<double> u;
  u.reserve(targets.size());
  for (const auto& t : targets) u.push_back(all[where.at(t)]);
  return u;
}

ScalingReport estimate_complexity(std::span<const TimingSample> samples) {
  if (samples.size() < 3) throw Error("estimate_complexity: need at least three samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    if (!(s.n_source > 0.0 && s.seconds > 0.0)) throw Error("estimate_complexity: samples must be positive");
    const double x = std::log(s.n_source), y = std::log(s.seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(samples.size());
  const double det = n * sxx - sx * sx;
  if (det <= 0.0) throw Error("estimate_complexity: all samples have the same size");
  ScalingReport r;
  r.slope = (n * sxy - sx * sy) / det;
  r.intercept = (sy - r.slope * sx) / n;
  r.samples = samples.size();
  return r;
}

}  // namespace lfmm
