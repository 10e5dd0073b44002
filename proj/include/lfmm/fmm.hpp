#pragma once

// Fast summation of u(m_i) = sum_j phi(m_i - m_j) q_j over a point set.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "lfmm/green.hpp"
#include "lfmm/lattice.hpp"
#include "lfmm/skeleton.hpp"
#include "lfmm/tree.hpp"

namespace lfmm {

inline constexpr std::size_t kDefaultLeafCapacity = 64;

struct FmmOptions {
  double eps = 1e-10;
  std::size_t leaf_capacity = kDefaultLeafCapacity;
  int proxy_per_edge = kDefaultProxyPerEdge;
};

/// Tree, lists and translation operators for a fixed point set.  Built once,
/// then applied to any number of charge vectors.  Keeps a reference to the
/// table, which must outlive the plan.
class FmmPlan {
 public:
  FmmPlan(std::vector<LatticePoint> points, const GreensTable& table, const FmmOptions& options = {});

  std::size_t size() const { return points_.size(); }
  std::span<const LatticePoint> points() const { return points_; }
  const QuadTree& tree() const { return tree_; }
  const std::vector<BoxLists>& lists() const { return lists_; }
  const OperatorHierarchy& operators() const { return ops_; }
  const FmmOptions& options() const { return options_; }

  /// Potentials at every plan point for charges aligned with points().
  std::vector<double> apply(std::span<const double> charges) const;

  /// Stored operator entries (level operators and per-leaf source maps).
  std::size_t stored_entries() const;
  std::size_t memory_estimate() const { return stored_entries() * sizeof(double); }

 private:
  struct LeafData {
    Eigen::MatrixXd t_ofs;              // P x |J^tau|
    std::vector<std::size_t> near;      // positions in tree boxes of the leaf and its neighbors
  };
  struct FarLinks {
    std::vector<std::size_t> sources;   // positions in tree boxes
    std::vector<std::size_t> offsets;   // index into interaction_offsets()
  };

  bool has_far_field() const { return tree_.depth() >= 2; }

  std::vector<LatticePoint> points_;
  const GreensTable* table_;
  FmmOptions options_;
  QuadTree tree_;
  std::vector<BoxLists> lists_;
  OperatorHierarchy ops_;
  std::vector<LeafData> leaf_;   // aligned with tree boxes; filled for leaves
  std::vector<FarLinks> far_;    // aligned with tree boxes; filled for levels >= 2
};

/// Sum over all leaves tau of A(J^tau, J^near) q(J^near).
std::vector<double> direct_near_field(const QuadTree& tree, const std::vector<BoxLists>& lists,
                                      std::span<const LatticePoint> points, std::span<const double> charges,
                                      const GreensTable& table, const TreeBox& leaf);

/// Build a plan and apply it once.
std::vector<double> fmm_apply(const SourceSet& sources, const GreensTable& table, const FmmOptions& options = {});

/// Potentials of `sources` at arbitrary targets.  Targets that are not source
/// nodes join the plan as zero charges.
std::vector<double> fmm_evaluate(const SourceSet& sources, std::span<const LatticePoint> targets,
                                 const GreensTable& table, const FmmOptions& options = {});

struct TimingSample {
  double n_source = 0.0;
  double seconds = 0.0;
};

struct ScalingReport {
  double slope = 0.0;
  double intercept = 0.0;  // log(seconds) at log(n) = 0
  std::size_t samples = 0;
};

/// Least-squares slope of log(seconds) against log(n_source).  Needs at
/// least three samples with positive values.
ScalingReport estimate_complexity(std::span<const TimingSample> samples);

}  // namespace lfmm
