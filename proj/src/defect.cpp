#include "lfmm/defect.hpp"

#include <map>
#include <set>
#include <string>

#include "lfmm/oracle.hpp"

namespace lfmm {

namespace {

bool lattice_bar(const Bar& bar) {
  const LatticePoint d = bar.b - bar.a;
  return std::llabs(d.m1) + std::llabs(d.m2) == 1;
}

double at(const LatticeField& w, const LatticePoint& m) {
  const auto it = w.find(m);
  if (it == w.end()) throw Error("field has no value at " + to_string(m));
  return it->second;
}

}  // namespace

DefectSpec::DefectSpec(std::vector<Bar> bars) {
  std::map<std::pair<LatticePoint, LatticePoint>, double> merged;
  for (const auto& bar : bars) {
    if (bar.a == bar.b) throw Error("defect: bar joins " + to_string(bar.a) + " to itself");
    if (!std::isfinite(bar.delta)) throw Error("defect: non-finite conductivity change");
    merged[std::minmax(bar.a, bar.b)] += bar.delta;
  }
  std::map<LatticePoint, double> conductance;
  for (const auto& [ends, delta] : merged) {
    if (delta == 0.0) continue;
    Bar bar{ends.first, ends.second, delta};
    const double base = lattice_bar(bar) ? 1.0 : 0.0;
    if (base + delta < 0.0) {
      throw Error("defect: bar " + to_string(bar.a) + "-" + to_string(bar.b) + " has negative conductivity");
    }
    bars_.push_back(bar);
    for (const auto& m : {bar.a, bar.b}) conductance.try_emplace(m, 4.0).first->second += delta;
  }
  for (const auto& [m, c] : conductance) {
    if (c <= 0.0) throw Error("defect: node " + to_string(m) + " is disconnected from the lattice");
    nodes_.push_back(m);
  }
}

LatticeField apply_B(const DefectSpec& spec, const LatticeField& w) {
  LatticeField out;
  for (const auto& m : spec.nodes()) out.emplace(m, 0.0);
  for (const auto& bar : spec.bars()) {
    const double flow = bar.delta * (at(w, bar.a) - at(w, bar.b));
    out[bar.a] += flow;
    out[bar.b] -= flow;
  }
  return out;
}

std::vector<double> apply_S(const LatticeField& f, std::span<const LatticePoint> targets, const GreensTable& table,
                            const DefectOptions& options) {
  SourceSet sources;
  std::vector<std::pair<LatticePoint, double>> sorted(f.begin(), f.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [m, q] : sorted) {
    if (q == 0.0) continue;
    sources.points.push_back(m);
    sources.charges.push_back(q);
  }
  if (sources.points.empty()) return std::vector<double>(targets.size(), 0.0);
  if (sources.size() * targets.size() <= options.direct_threshold) return direct_sum(sources, targets, table);
  return fmm_evaluate(sources, targets, table, options.fmm);
}

DefectSolution solve_reduced(const DefectSpec& spec, const FarField& far, const GreensTable& table,
                             const DefectOptions& options) {
  DefectSolution sol;
  sol.far = far;
  if (spec.empty()) return sol;

  const auto& nodes = spec.nodes();
  const auto n = static_cast<Eigen::Index>(nodes.size());
  auto to_field = [&](const Eigen::VectorXd& x) {
    LatticeField f;
    for (Eigen::Index i = 0; i < n; ++i) f.emplace(nodes[static_cast<std::size_t>(i)], x[i]);
    return f;
  };
  auto to_vector = [&](const LatticeField& f) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = f.at(nodes[static_cast<std::size_t>(i)]);
    return x;
  };
  // B S x, with S x needed only on the defect nodes.
  auto bs = [&](const Eigen::VectorXd& x) {
    const std::vector<double> s = apply_S(to_field(x), nodes, table, options);
    return to_vector(apply_B(spec, to_field(Eigen::Map<const Eigen::VectorXd>(s.data(), n))));
  };

  LatticeField v;
  for (const auto& m : nodes) v.emplace(m, far(m));
  const Eigen::VectorXd bv = to_vector(apply_B(spec, v));
  const Eigen::VectorXd rhs = -bs(bv);

  const GmresResult r = gmres([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(x + bs(x)); }, rhs, options.tol,
                              options.max_iter);
  if (!r.converged) {
    throw Error("defect: iteration stalled at relative residual " + std::to_string(r.relative_residual) + " after " +
                std::to_string(r.iterations) + " steps");
  }
  sol.mu = to_field(r.x);
  sol.density = to_field(bv + r.x);
  sol.iterations = r.iterations;
  sol.relative_residual = r.relative_residual;
  return sol;
}

std::vector<double> evaluate_solution(const DefectSolution& solution, std::span<const LatticePoint> queries,
                                      const GreensTable& table, const DefectOptions& options) {
  std::vector<double> u = apply_S(solution.density, queries, table, options);
  for (std::size_t i = 0; i < queries.size(); ++i) u[i] = solution.far(queries[i]) - u[i];
  return u;
}

std::vector<double> solve_defect(const DefectSpec& spec, const FarField& far, std::span<const LatticePoint> queries,
                                 const GreensTable& table, const DefectOptions& options) {
  return evaluate_solution(solve_reduced(spec, far, table, options), queries, table, options);
}

double perturbed_residual(const DefectSpec& spec, const LatticeField& u, const LatticePoint& m) {
  double r = apply_discrete_laplacian(u, m);
  for (const auto& bar : spec.bars()) {
    if (bar.a == m) r += bar.delta * (at(u, bar.a) - at(u, bar.b));
    if (bar.b == m) r += bar.delta * (at(u, bar.b) - at(u, bar.a));
  }
  return r;
}

}  // namespace lfmm
