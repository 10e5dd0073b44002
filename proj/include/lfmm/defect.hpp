#pragma once

// Infinite lattice with finitely many modified bars: (A + B) u = 0 with
// u - v -> 0 for a linear far field v.  Reduced to the defect nodes through
// the free-space solution operator S = A^-1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lfmm/fmm.hpp"
#include "lfmm/green.hpp"
#include "lfmm/lattice.hpp"

namespace lfmm {

/// Conductivity change on the bar between two distinct nodes.
struct Bar {
  LatticePoint a;
  LatticePoint b;
  double delta = 0.0;
};

class DefectSpec {
 public:
  DefectSpec() = default;
  /// Bars joining the same pair of nodes are merged.  Throws on a degenerate
  /// bar, a lattice bar with delta < -1, or a node left with no conductance.
  explicit DefectSpec(std::vector<Bar> bars);

  const std::vector<Bar>& bars() const { return bars_; }
  /// Nodes touched by some bar, ascending.
  const std::vector<LatticePoint>& nodes() const { return nodes_; }
  bool empty() const { return bars_.empty(); }

 private:
  std::vector<Bar> bars_;
  std::vector<LatticePoint> nodes_;
};

/// v(m) = c1 m1 + c2 m2.
struct FarField {
  double c1 = 0.0;
  double c2 = 0.0;
  double operator()(const LatticePoint& m) const {
    return c1 * static_cast<double>(m.m1) + c2 * static_cast<double>(m.m2);
  }
};

/// (Bw)(a) = sum over bars at a of delta * (w(a) - w(b)) on the defect nodes.
/// Throws if w misses a bar endpoint.
LatticeField apply_B(const DefectSpec& spec, const LatticeField& w);

struct DefectOptions {
  double tol = 1e-10;
  int max_iter = 200;
  FmmOptions fmm;
  /// Sources times targets below which S is summed directly.
  std::size_t direct_threshold = std::size_t{1} << 22;
};

/// [S f](t) = sum_n phi(t - n) f(n) at each target.
std::vector<double> apply_S(const LatticeField& f, std::span<const LatticePoint> targets, const GreensTable& table,
                            const DefectOptions& options = {});

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Unpreconditioned GMRES without restarts for a matrix-free operator.
template <class Op>
GmresResult gmres(const Op& op, const Eigen::VectorXd& b, double tol, int max_iter);

struct DefectSolution {
  FarField far;
  LatticeField mu;       // on the defect nodes
  LatticeField density;  // B v + mu, so that u = v - S density
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solve mu + B S mu = -B S B v on the defect nodes.  Throws if the iteration
/// does not reach options.tol within options.max_iter steps.
DefectSolution solve_reduced(const DefectSpec& spec, const FarField& far, const GreensTable& table,
                             const DefectOptions& options = {});

/// u at the queried nodes, in query order.
std::vector<double> evaluate_solution(const DefectSolution& solution, std::span<const LatticePoint> queries,
                                      const GreensTable& table, const DefectOptions& options = {});

std::vector<double> solve_defect(const DefectSpec& spec, const FarField& far, std::span<const LatticePoint> queries,
                                 const GreensTable& table, const DefectOptions& options = {});

/// [(A + B) u](m) for a field that holds m, its stencil and its bar partners.
double perturbed_residual(const DefectSpec& spec, const LatticeField& u, const LatticePoint& m);

// ---------------------------------------------------------------------------

template <class Op>
GmresResult gmres(const Op& op, const Eigen::VectorXd& b, double tol, int max_iter) {
  GmresResult r;
  const Eigen::Index n = b.size();
  const double beta = b.norm();
  r.x = Eigen::VectorXd::Zero(n);
  if (beta == 0.0) {
    r.converged = true;
    return r;
  }
  const int m = static_cast<int>(std::min<Eigen::Index>(max_iter, n));
  Eigen::MatrixXd v(n, m + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
  v.col(0) = b / beta;
  g[0] = beta;
  int k = 0;
  double res = 1.0;
  for (; k < m && res > tol; ++k) {
    Eigen::VectorXd w = op(v.col(k).eval());
    // Modified Gram-Schmidt, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= k; ++i) {
        const double c = v.col(i).dot(w);
        h(i, k) += c;
        w -= c * v.col(i);
      }
    }
    h(k + 1, k) = w.norm();
    if (h(k + 1, k) > 0.0) v.col(k + 1) = w / h(k + 1, k);
    for (int i = 0; i < k; ++i) {
      const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
      h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
      h(i, k) = t;
    }
    const double d = std::hypot(h(k, k), h(k + 1, k));
    cs[k] = h(k, k) / d;
    sn[k] = h(k + 1, k) / d;
    h(k, k) = d;
    h(k + 1, k) = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = cs[k] * g[k];
    res = std::abs(g[k + 1]) / beta;
    if (h(k, k) == 0.0) break;
  }
  const Eigen::VectorXd y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  r.x = v.leftCols(k) * y;
  r.iterations = k;
  r.relative_residual = (b - op(r.x)).norm() / beta;
  r.converged = r.relative_residual <= tol;
  return r;
}

}  // namespace lfmm
