#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>
#include <vector>

#include "lfmm/gauss.hpp"
#include "lfmm/green.hpp"
#include "lfmm/lattice.hpp"

namespace lfmm::testing {

/// Shared table, built once per test binary.
inline const GreensTable& table() {
  static const GreensTable t = GreensTable::build(kDefaultTableRadius);
  return t;
}

/// Independent evaluation of phi from the one-dimensional form
///   phi(m) = (1 / 2 pi) \int_0^pi (cos(m2 t) exp(-|m1| s) - 1) / sinh(s) dt,
///   cosh(s) = 2 - cos(t),
/// with composite Gauss-Legendre on equal panels.
inline double phi_line_integral(std::int64_t m1, std::int64_t m2, int panels = 400) {
  const GaussRule& g = gauss_legendre_20();
  const double a = static_cast<double>(std::llabs(m1));
  const double b = static_cast<double>(m2);
  const double h = std::numbers::pi / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      const double t = h * (p + 0.5 * (g.nodes[k] + 1.0));
      const double x = 2.0 * std::sin(0.5 * t) * std::sin(0.5 * t);  // cosh(s) - 1
      const double root = std::sqrt(x * (x + 2.0));                    // sinh(s)
      const double s = std::log1p(x + root);
      const double half = std::sin(0.5 * b * t);
      const double numerator = std::cos(b * t) * std::expm1(-a * s) - 2.0 * half * half;
      sum += 0.5 * h * g.weights[k] * numerator / root;
    }
  }
  return sum / (2.0 * std::numbers::pi);
}

inline SourceSet random_sources(std::size_t n, std::int64_t side, std::uint64_t seed, LatticePoint shift = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> coord(0, side - 1);
  std::uniform_real_distribution<double> charge(-1.0, 1.0);
  std::unordered_set<LatticePoint, LatticePointHash> seen;
  SourceSet s;
  while (s.size() < n) {
    const LatticePoint p{coord(rng) + shift.m1, coord(rng) + shift.m2};
    if (!seen.insert(p).second) continue;
    s.points.push_back(p);
    s.charges.push_back(charge(rng));
  }
  return s;
}

inline double relative_l2(const std::vector<double>& approx, const std::vector<double>& exact) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (approx[i] - exact[i]) * (approx[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  return std::sqrt(num / den);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace lfmm::testing
