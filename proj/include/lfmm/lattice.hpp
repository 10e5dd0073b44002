#pragma once

#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfmm {

/// Raised for invalid input and failed preconditions throughout the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node of the integer lattice Z^2.
struct LatticePoint {
  std::int64_t m1 = 0;
  std::int64_t m2 = 0;

  friend constexpr auto operator<=>(const LatticePoint&, const LatticePoint&) = default;

  constexpr LatticePoint operator+(const LatticePoint& o) const { return {m1 + o.m1, m2 + o.m2}; }
  constexpr LatticePoint operator-(const LatticePoint& o) const { return {m1 - o.m1, m2 - o.m2}; }
  constexpr LatticePoint operator-() const { return {-m1, -m2}; }
};

inline std::int64_t max_norm(const LatticePoint& m) {
  return std::max(std::llabs(m.m1), std::llabs(m.m2));
}

std::string to_string(const LatticePoint& m);

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& m) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(m.m1) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(m.m2) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Point charges on distinct lattice nodes.
struct SourceSet {
  std::vector<LatticePoint> points;
  std::vector<double> charges;

  std::size_t size() const { return points.size(); }

  /// Throws unless lengths match and points are pairwise distinct.
  void validate() const;
};

}  // namespace lfmm
