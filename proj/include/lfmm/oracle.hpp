#pragma once

// Reference implementations used to validate the fast paths.

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "lfmm/green.hpp"
#include "lfmm/lattice.hpp"

namespace lfmm {

/// u_i = sum_j phi(t_i - m_j) q_j, summed in ascending source order.
std::vector<double> direct_sum(const SourceSet& sources, std::span<const LatticePoint> targets,
                               const GreensTable& table);

/// A_ij = phi(m_i - m_j): symmetric with a zero diagonal.
class DenseKernelMatrix {
 public:
  DenseKernelMatrix(std::span<const LatticePoint> points, const GreensTable& table);

  const Eigen::MatrixXd& matrix() const { return a_; }
  Eigen::Index size() const { return a_.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& q) const { return a_ * q; }

 private:
  Eigen::MatrixXd a_;
};

/// Upper bound on the unknowns the dense oracles accept.
inline constexpr std::size_t kDenseOracleLimit = 3000;

/// Free-space convolution of a charge map whose support lies in the window
/// max_norm(m) <= window_radius, evaluated on the same support.  Throws if the
/// support leaves the window or exceeds kDenseOracleLimit nodes.
LatticeField dense_solve_truncated(const LatticeField& rhs, std::int64_t window_radius, const GreensTable& table);

}  // namespace lfmm
