#include "lfmm/green.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "lfmm/gauss.hpp"

namespace lfmm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvFourPiSq = 1.0 / (4.0 * kPi * kPi);
constexpr int kMaxSeriesTerms = 25;
constexpr double kSeriesTolerance = 1e-15;
constexpr double kTableTolerance = 1e-13;

double half_angle_sin_sq(double x) {
  const double s = std::sin(0.5 * x);
  return s * s;
}

// cos(A) cos(B) - 1 written without cancellation; sa = sin^2(A/2), sb = sin^2(B/2).
double cos_product_minus_one(double sa, double sb) { return -2.0 * (sa + sb - 2.0 * sa * sb); }

// Gauss nodes on (0, pi) for n equal panels of [-pi, pi], folded by the
// evenness of the symmetrized integrand (weights doubled).  The first
// `center` nodes are the positive half of the center panel [-a, a].
struct HalfAxis {
  std::vector<double> t;
  std::vector<double> w;
  std::size_t center = 0;
};

HalfAxis half_axis(int n) {
  const GaussRule& g = gauss_legendre_20();
  const double a = kPi / n;
  HalfAxis axis;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    if (g.nodes[k] > 0.0) {
      axis.t.push_back(a * g.nodes[k]);
      axis.w.push_back(2.0 * a * g.weights[k]);
    }
  }
  axis.center = axis.t.size();
  for (int panel = 1; panel <= (n - 1) / 2; ++panel) {
    const double c = 2.0 * a * panel;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      axis.t.push_back(c + a * g.nodes[k]);
      axis.w.push_back(2.0 * a * g.weights[k]);
    }
  }
  return axis;
}

// Quadrature of the symmetrized integrand over a rectangle in the positive
// quadrant, unscaled.
double rectangle_integral(const LatticePoint& m, double x0, double x1, double y0, double y1) {
  const GaussRule& g = gauss_legendre_20();
  const std::size_t q = g.nodes.size();
  double sx[20], dx[20], wx[20], sy[20], dy[20], wy[20];
  const double hx = 0.5 * (x1 - x0), cx = 0.5 * (x1 + x0);
  const double hy = 0.5 * (y1 - y0), cy = 0.5 * (y1 + y0);
  for (std::size_t k = 0; k < q; ++k) {
    const double tx = cx + hx * g.nodes[k];
    const double ty = cy + hy * g.nodes[k];
    sx[k] = half_angle_sin_sq(tx * static_cast<double>(m.m1));
    sy[k] = half_angle_sin_sq(ty * static_cast<double>(m.m2));
    dx[k] = 4.0 * half_angle_sin_sq(tx);
    dy[k] = 4.0 * half_angle_sin_sq(ty);
    wx[k] = hx * g.weights[k];
    wy[k] = hy * g.weights[k];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      row += wy[j] * cos_product_minus_one(sx[i], sy[j]) / (dx[i] + dy[j]);
    }
    total += wx[i] * row;
  }
  return total;
}

// Integral over the annulus [-h, h]^2 \ [-h/2, h/2]^2, scaled by (2 pi)^-2.
// The full annulus splits into eight rectangles; by symmetry of the
// symmetrized integrand, four times the positive-quadrant part suffices.
double annulus_term(const LatticePoint& m, double h) {
  const double g = 0.5 * h;
  const double quadrant = rectangle_integral(m, g, h, g, h) + rectangle_integral(m, 0.0, g, g, h) +
                          rectangle_integral(m, g, h, 0.0, g);
  return 4.0 * quadrant * kInvFourPiSq;
}

double off_center_sum(const LatticePoint& m, const HalfAxis& axis) {
  const std::size_t q = axis.t.size();
  std::vector<double> s1(q), s2(q), d(q);
  for (std::size_t k = 0; k < q; ++k) {
    s1[k] = half_angle_sin_sq(axis.t[k] * static_cast<double>(m.m1));
    s2[k] = half_angle_sin_sq(axis.t[k] * static_cast<double>(m.m2));
    d[k] = 4.0 * half_angle_sin_sq(axis.t[k]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    const std::size_t j0 = i < axis.center ? axis.center : 0;
    double row = 0.0;
    for (std::size_t j = j0; j < q; ++j) {
      row += axis.w[j] * cos_product_minus_one(s1[i], s2[j]) / (d[i] + d[j]);
    }
    total += axis.w[i] * row;
  }
  return total * kInvFourPiSq;
}

std::uint64_t fnv1a(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

void write_le_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
  os.write(bytes, 8);
}

std::uint64_t read_le_u64(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  if (!is) throw Error("table file truncated");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return v;
}

}  // namespace

std::string to_string(const LatticePoint& m) {
  return "(" + std::to_string(m.m1) + "," + std::to_string(m.m2) + ")";
}

void SourceSet::validate() const {
  if (points.size() != charges.size()) throw Error("source set: points and charges differ in length");
  std::vector<LatticePoint> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) throw Error("source set: duplicate lattice point " + to_string(*dup));
}

int quadrature_panel_count(const LatticePoint& m) {
  const double r = std::hypot(static_cast<double>(m.m1), static_cast<double>(m.m2));
  int n = std::max(1, static_cast<int>(std::ceil(r - 1e-12)));
  if (n % 2 == 0) ++n;
  return n;
}

CenterSeries center_panel_series(const LatticePoint& m, double half_width) {
  CenterSeries series;
  double partial = 0.0;
  double h = half_width;
  for (int k = 0; k < kMaxSeriesTerms; ++k, h *= 0.5) {
    const double term = annulus_term(m, h);
    partial += term;
    // Tail of a ratio-1/4 geometric series after this term.
    const double accelerated = partial + term / 3.0;
    series.terms.push_back(term);
    series.accelerated.push_back(accelerated);
    if (k > 0 && std::abs(accelerated - series.accelerated[k - 1]) < kSeriesTolerance) break;
  }
  series.value = series.accelerated.back();
  return series;
}

double phi_quadrature(const LatticePoint& m) {
  if (m.m1 == 0 && m.m2 == 0) return 0.0;
  const int n = quadrature_panel_count(m);
  const HalfAxis axis = half_axis(n);
  return off_center_sum(m, axis) + center_panel_series(m, kPi / n).value;
}

double phi_asymptotic(const LatticePoint& m) {
  if (m.m1 == 0 && m.m2 == 0) throw Error("phi_asymptotic: undefined at the origin");
  const double x = static_cast<double>(m.m1);
  const double y = static_cast<double>(m.m2);
  const double r2 = x * x + y * y;
  const double c = x * x / r2;
  const double s = y * y / r2;
  const double second = (c * c - 6.0 * c * s + s * s) / r2;
  const double c2 = c * c, s2 = s * s;
  const double fourth =
      (43.0 * c2 * c2 - 772.0 * c2 * c * s + 1570.0 * c2 * s2 - 772.0 * c * s2 * s + 43.0 * s2 * s2) / (r2 * r2);
  return -(0.5 * std::log(r2) + kEulerGamma + 0.5 * std::log(8.0)) / (2.0 * kPi) + second / (24.0 * kPi) +
         fourth / (480.0 * kPi);
}

double apply_discrete_laplacian(const LatticeField& u, const LatticePoint& m) {
  return apply_discrete_laplacian(
      [&u](const LatticePoint& p) {
        const auto it = u.find(p);
        if (it == u.end()) throw Error("discrete Laplacian: field undefined at " + to_string(p));
        return it->second;
      },
      m);
}

GreensTable GreensTable::build(int radius) {
  if (radius < 1) throw Error("GreensTable: radius must be at least 1");
  const std::size_t r = static_cast<std::size_t>(radius);
  std::vector<double> values((r + 1) * (r + 2) / 2, 0.0);

  // Entries sharing a panel count share the off-center weight matrix
  // W_ij = w_i w_j / (d_i + d_j), so group them.
  std::map<int, std::vector<LatticePoint>> groups;
  for (std::int64_t a = 1; a <= radius; ++a) {
    for (std::int64_t b = 0; b <= a; ++b) {
      const LatticePoint m{a, b};
      groups[quadrature_panel_count(m)].push_back(m);
    }
  }

  for (const auto& [n, members] : groups) {
    const HalfAxis axis = half_axis(n);
    const Eigen::Index q = static_cast<Eigen::Index>(axis.t.size());
    const Eigen::Index cc = static_cast<Eigen::Index>(axis.center);
    Eigen::VectorXd d(q), w(q);
    for (Eigen::Index k = 0; k < q; ++k) {
      d[k] = 4.0 * half_angle_sin_sq(axis.t[k]);
      w[k] = axis.w[k];
    }
    Eigen::MatrixXd weights(q, q);
    for (Eigen::Index j = 0; j < q; ++j) {
      for (Eigen::Index i = 0; i < q; ++i) weights(i, j) = w[i] * w[j] / (d[i] + d[j]);
    }
    weights.topLeftCorner(cc, cc).setZero();
    const Eigen::VectorXd row_sums = weights.rowwise().sum();

#pragma omp parallel for schedule(dynamic)
    for (std::size_t e = 0; e < members.size(); ++e) {
      const LatticePoint& m = members[e];
      Eigen::VectorXd s1(q), s2(q);
      for (Eigen::Index k = 0; k < q; ++k) {
        s1[k] = half_angle_sin_sq(axis.t[k] * static_cast<double>(m.m1));
        s2[k] = half_angle_sin_sq(axis.t[k] * static_cast<double>(m.m2));
      }
      // sum_ij W_ij * (-2)(s1_i + s2_j - 2 s1_i s2_j)
      const Eigen::VectorXd ws2 = weights * s2;
      const double off = -2.0 * (s1.dot(row_sums) + row_sums.dot(s2) - 2.0 * s1.dot(ws2));
      const double value = off * kInvFourPiSq + center_panel_series(m, kPi / n).value;
      values[static_cast<std::size_t>(m.m1 * (m.m1 + 1) / 2 + m.m2)] = value;
    }
  }
  // Closed forms for the entries next to the origin.
  values[0] = 0.0;
  values[1] = -0.25;
  values[2] = -1.0 / kPi;
  return from_values(radius, std::move(values));
}

GreensTable GreensTable::from_values(int radius, std::vector<double> values) {
  const std::size_t r = static_cast<std::size_t>(radius);
  if (radius < 0 || values.size() != (r + 1) * (r + 2) / 2) throw Error("GreensTable: octant size mismatch");
  GreensTable table;
  table.radius_ = radius;
  table.values_ = std::move(values);
  return table;
}

std::uint64_t GreensTable::checksum() const { return fnv1a(values_); }

std::string GreensTable::file_name(int radius) { return "phi_table_R" + std::to_string(radius) + ".bin"; }

std::string GreensTable::sidecar_name(int radius) { return "phi_table_R" + std::to_string(radius) + ".txt"; }

void GreensTable::save(const std::filesystem::path& directory) const {
  std::filesystem::create_directories(directory);
  {
    std::ofstream os(directory / file_name(radius_), std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write table file in " + directory.string());
    write_le_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(radius_)));
    for (double v : values_) write_le_u64(os, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream side(directory / sidecar_name(radius_), std::ios::trunc);
  side << "radius " << radius_ << "\n";
  side << "entries " << values_.size() << "\n";
  side << "tolerance " << std::setprecision(3) << kTableTolerance << "\n";
  side << "checksum " << std::hex << std::setw(16) << std::setfill('0') << checksum() << "\n";
}

GreensTable GreensTable::load(const std::filesystem::path& directory, int radius) {
  std::ifstream is(directory / file_name(radius), std::ios::binary);
  if (!is) throw Error("table file not found: " + (directory / file_name(radius)).string());
  const auto stored = static_cast<std::int64_t>(read_le_u64(is));
  if (stored != radius) throw Error("table file radius mismatch");
  const std::size_t r = static_cast<std::size_t>(radius);
  std::vector<double> values((r + 1) * (r + 2) / 2);
  for (double& v : values) v = std::bit_cast<double>(read_le_u64(is));
  if (is.peek() != std::char_traits<char>::eof()) throw Error("table file has trailing bytes");

  std::ifstream side(directory / sidecar_name(radius));
  if (!side) throw Error("table sidecar not found for radius " + std::to_string(radius));
  std::string key;
  std::string expected;
  while (side >> key) {
    std::string value;
    side >> value;
    if (key == "checksum") expected = value;
  }
  GreensTable table = from_values(radius, std::move(values));
  std::ostringstream actual;
  actual << std::hex << std::setw(16) << std::setfill('0') << table.checksum();
  if (expected != actual.str()) {
    throw Error("table checksum mismatch: expected " + expected + ", found " + actual.str());
  }
  return table;
}

GreensTable GreensTable::load_or_build(const std::filesystem::path& directory, int radius) {
  // A damaged file is an error, not a cache miss.
  if (std::filesystem::exists(directory / file_name(radius))) return load(directory, radius);
  GreensTable table = build(radius);
  table.save(directory);
  return table;
}

}  // namespace lfmm
