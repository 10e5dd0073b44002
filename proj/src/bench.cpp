#include "lfmm/bench.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

namespace lfmm {

Distribution parse_distribution(const std::string& name) {
  if (name == "dense") return Distribution::dense;
  if (name == "random") return Distribution::random;
  if (name == "circle") return Distribution::circle;
  throw Error("unknown distribution '" + name + "' (expected dense, random or circle)");
}

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::dense: return "dense";
    case Distribution::random: return "random";
    case Distribution::circle: return "circle";
  }
  return "?";
}

SourceSet generate_sources(Distribution d, std::int64_t n, double alpha, std::uint64_t seed) {
  if (n < 1 || !std::has_single_bit(static_cast<std::uint64_t>(n))) throw Error("bench: n must be a power of two");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> charge(-1.0, 1.0);
  SourceSet s;
  std::unordered_set<LatticePoint, LatticePointHash> seen;
  switch (d) {
    case Distribution::dense:
      if (n > 8192) throw Error("bench: dense distribution limited to n <= 8192");
      for (std::int64_t x = 0; x < n; ++x) {
        for (std::int64_t y = 0; y < n; ++y) s.points.push_back({x, y});
      }
      break;
    case Distribution::random: {
      std::uniform_int_distribution<std::int64_t> coord(0, n - 1);
      if (n > (std::int64_t{1} << 31)) throw Error("bench: n too large");
      while (static_cast<std::int64_t>(s.points.size()) < n) {
        const LatticePoint p{coord(rng), coord(rng)};
        if (seen.insert(p).second) s.points.push_back(p);
      }
      break;
    }
    case Distribution::circle: {
      if (!(alpha > 0.0)) throw Error("bench: alpha must be positive");
      const auto count = static_cast<std::int64_t>(std::llround(alpha * static_cast<double>(n)));
      const double r = 0.5 * static_cast<double>(n - 1);
      for (std::int64_t k = 0; k < count; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
        const LatticePoint p{std::llround(r + r * std::cos(t)), std::llround(r + r * std::sin(t))};
        if (seen.insert(p).second) s.points.push_back(p);
      }
      break;
    }
  }
  s.charges.resize(s.points.size());
  for (auto& q : s.charges) q = charge(rng);
  return s;
}

BenchRow run_bench(Distribution d, std::int64_t n, double alpha, std::uint64_t seed, const GreensTable& table,
                   const FmmOptions& options) {
  const SourceSet s = generate_sources(d, n, alpha, seed);
  const auto start = std::chrono::steady_clock::now();
  const FmmPlan plan(s.points, table, options);
  const std::vector<double> u = plan.apply(s.charges);
  const auto stop = std::chrono::steady_clock::now();
  BenchRow row;
  row.n = n;
  row.n_source = s.size();
  row.wall_time = std::chrono::duration<double>(stop - start).count();
  row.mem_estimate = plan.memory_estimate();
  return row;
}

}  // namespace lfmm
