#include "lfmm/oracle.hpp"

#include <algorithm>
#include <string>

namespace lfmm {

std::vector<double> direct_sum(const SourceSet& sources, std::span<const LatticePoint> targets,
                               const GreensTable& table) {
  if (sources.points.size() != sources.charges.size()) throw Error("direct_sum: charge count mismatch");
  std::vector<double> u(targets.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < sources.points.size(); ++j) sum += phi(targets[i] - sources.points[j], table) * sources.charges[j];
    u[i] = sum;
  }
  return u;
}

DenseKernelMatrix::DenseKernelMatrix(std::span<const LatticePoint> points, const GreensTable& table) {
  const auto n = static_cast<Eigen::Index>(points.size());
  a_.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    a_(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      a_(i, j) = phi(points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)], table);
      a_(j, i) = a_(i, j);
    }
  }
}

LatticeField dense_solve_truncated(const LatticeField& rhs, std::int64_t window_radius, const GreensTable& table) {
  if (window_radius < 0) throw Error("dense_solve_truncated: negative window radius");
  if (rhs.size() > kDenseOracleLimit) {
    throw Error("dense_solve_truncated: " + std::to_string(rhs.size()) + " unknowns exceed the limit of " +
                std::to_string(kDenseOracleLimit));
  }
  std::vector<LatticePoint> points;
  points.reserve(rhs.size());
  for (const auto& [m, q] : rhs) {
    if (max_norm(m) > window_radius) throw Error("dense_solve_truncated: node " + to_string(m) + " outside the window");
    points.push_back(m);
  }
  std::sort(points.begin(), points.end());
  Eigen::VectorXd q(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) q[static_cast<Eigen::Index>(i)] = rhs.at(points[i]);
  const Eigen::VectorXd u = DenseKernelMatrix(points, table).apply(q);
  LatticeField out;
  for (std::size_t i = 0; i < points.size(); ++i) out.emplace(points[i], u[static_cast<Eigen::Index>(i)]);
  return out;
}

}  // namespace lfmm
