#pragma once

// Load distributions and timed runs for scaling studies.

#include <cstdint>
#include <string>

#include "lfmm/fmm.hpp"

namespace lfmm {

enum class Distribution { dense, random, circle };

Distribution parse_distribution(const std::string& name);
std::string to_string(Distribution d);

/// dense: every node of the n x n square.  random: n distinct nodes drawn
/// uniformly from it.  circle: alpha * n nodes at equispaced angles on the
/// inscribed circle, rounded to the lattice.  Charges are uniform in [-1, 1].
/// n must be a power of two.  Deterministic for a given seed.
SourceSet generate_sources(Distribution d, std::int64_t n, double alpha, std::uint64_t seed);

struct BenchRow {
  std::int64_t n = 0;
  std::size_t n_source = 0;
  double wall_time = 0.0;  // seconds, plan build plus one application
  std::size_t mem_estimate = 0;  // bytes of stored operators
};

BenchRow run_bench(Distribution d, std::int64_t n, double alpha, std::uint64_t seed, const GreensTable& table,
                   const FmmOptions& options);

}  // namespace lfmm
