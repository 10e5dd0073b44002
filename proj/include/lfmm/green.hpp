#pragma once

// Lattice Green's function of the five-point discrete Laplacian on Z^2.
//
// phi(m) = (2 pi)^-2 \int_{[-pi,pi]^2} (cos(t.m) - 1) / (4 sin^2(t1/2) + 4 sin^2(t2/2)) dt
//
// normalized so that phi(0) = 0 and [A phi](m) = delta_{m,0}.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lfmm/lattice.hpp"

namespace lfmm {

inline constexpr double kEulerGamma = 0.5772156649015329;

/// Default crossover radius between tabulated and asymptotic values.
inline constexpr int kDefaultTableRadius = 96;

/// Odd panel count used by phi_quadrature for the displacement m.
int quadrature_panel_count(const LatticePoint& m);

/// Direct quadrature of the Fourier integral.  Accurate to about 1e-13
/// absolute; the cost grows like |m|^2.
double phi_quadrature(const LatticePoint& m);

/// Large-|m| expansion truncated after the |m|^-4 term.  Throws at the origin.
double phi_asymptotic(const LatticePoint& m);

/// Terms of the telescoping series for the center panel [-a, a]^2, scaled by
/// (2 pi)^-2.  Exposed for convergence tests.
struct CenterSeries {
  std::vector<double> terms;
  std::vector<double> accelerated;
  double value = 0.0;
};
CenterSeries center_panel_series(const LatticePoint& m, double half_width);

/// Octant table of phi for 0 <= m2 <= m1 <= radius.  Immutable once built.
class GreensTable {
 public:
  GreensTable() = default;

  static GreensTable build(int radius = kDefaultTableRadius);

  int radius() const { return radius_; }
  std::span<const double> octant() const { return values_; }
  std::size_t entry_count() const { return values_.size(); }

  bool covers(const LatticePoint& m) const { return max_norm(m) <= radius_; }

  /// Table value with the 8-fold symmetry folded in.  Requires covers(m).
  double lookup(const LatticePoint& m) const {
    std::int64_t a = m.m1 < 0 ? -m.m1 : m.m1;
    std::int64_t b = m.m2 < 0 ? -m.m2 : m.m2;
    if (a < b) std::swap(a, b);
    return values_[static_cast<std::size_t>(a * (a + 1) / 2 + b)];
  }

  /// Little-endian binary: int64 radius, then the octant as float64.
  void save(const std::filesystem::path& directory) const;
  static GreensTable load(const std::filesystem::path& directory, int radius);

  /// Load from the cache directory if the file exists, else build and save.
  /// A file that fails validation throws.
  static GreensTable load_or_build(const std::filesystem::path& directory, int radius);

  static std::string file_name(int radius);
  static std::string sidecar_name(int radius);

  std::uint64_t checksum() const;

  static GreensTable from_values(int radius, std::vector<double> values);

 private:
  int radius_ = 0;
  std::vector<double> values_;
};

/// phi(m): table lookup inside the table radius, asymptotic expansion outside.
inline double phi(const LatticePoint& m, const GreensTable& table) {
  return table.covers(m) ? table.lookup(m) : phi_asymptotic(m);
}

/// 4u(m) - u(m+e1) - u(m-e1) - u(m+e2) - u(m-e2).
template <class Field>
double apply_discrete_laplacian(const Field& u, const LatticePoint& m) {
  return 4.0 * u(m) - u(LatticePoint{m.m1 + 1, m.m2}) - u(LatticePoint{m.m1 - 1, m.m2}) -
         u(LatticePoint{m.m1, m.m2 + 1}) - u(LatticePoint{m.m1, m.m2 - 1});
}

using LatticeField = std::unordered_map<LatticePoint, double, LatticePointHash>;

/// Map-based overload; throws if a stencil node is missing.
double apply_discrete_laplacian(const LatticeField& u, const LatticePoint& m);

}  // namespace lfmm
