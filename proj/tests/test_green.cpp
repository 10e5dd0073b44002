#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "lfmm/gauss.hpp"
#include "lfmm/green.hpp"
#include "support.hpp"

using namespace lfmm;
using lfmm::testing::phi_line_integral;
using lfmm::testing::table;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 20}) {
    const GaussRule g = gauss_legendre(n);
    for (int d = 0; d < 2 * n; ++d) {
      double sum = 0.0;
      for (std::size_t k = 0; k < g.nodes.size(); ++k) sum += g.weights[k] * std::pow(g.nodes[k], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(sum == doctest::Approx(exact).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), Error);
}

TEST_CASE("phi_quadrature at closed-form displacements") {
  CHECK(phi_quadrature({0, 0}) == 0.0);
  CHECK(std::abs(phi_quadrature({1, 0}) + 0.25) <= 1e-14);
  CHECK(std::abs(phi_quadrature({1, 1}) + 1.0 / std::numbers::pi) <= 1e-13);
  CHECK(std::abs(phi_quadrature({2, 0}) - (2.0 / std::numbers::pi - 1.0)) <= 1e-13);
}

TEST_CASE("phi_quadrature matches the line-integral oracle") {
  const LatticePoint cases[] = {{3, 2}, {5, 0}, {0, 7}, {10, 7}, {13, 4}, {21, 21}, {30, 20}, {35, 10}};
  for (const auto& m : cases) {
    INFO(to_string(m));
    CHECK(std::abs(phi_quadrature(m) - phi_line_integral(m.m1, m.m2)) <= 1e-13);
  }
}

TEST_CASE("phi_quadrature high-precision reference values") {
  // Reference digits from an independent 50-digit evaluation.
  const std::pair<LatticePoint, double> ref[] = {
      {{5, 0}, -0.51290232907892292},  {{10, 0}, -0.62367557121570847}, {{20, 0}, -0.73409568801386743},
      {{30, 0}, -0.79864603015520377}, {{21, 21}, -0.79706815312471023}, {{30, 20}, -0.82793059921993523},
  };
  for (const auto& [m, v] : ref) {
    INFO(to_string(m));
    CHECK(std::abs(phi_quadrature(m) - v) <= 1e-13);
  }
}

TEST_CASE("phi_quadrature is symmetric under reflections") {
  for (const LatticePoint m : {LatticePoint{7, 3}, LatticePoint{12, 5}, LatticePoint{4, 9}}) {
    const double v = phi_quadrature(m);
    CHECK(std::abs(phi_quadrature({-m.m1, m.m2}) - v) <= 1e-13);
    CHECK(std::abs(phi_quadrature({m.m1, -m.m2}) - v) <= 1e-13);
    CHECK(std::abs(phi_quadrature({m.m2, m.m1}) - v) <= 1e-13);
  }
}

TEST_CASE("center panel series converges in a handful of terms") {
  const LatticePoint m{9, 4};
  const CenterSeries s = center_panel_series(m, std::numbers::pi / quadrature_panel_count(m));
  CHECK(s.terms.size() <= 25);
  CHECK(s.terms.size() >= 5);
  for (std::size_t k = 4; k < s.terms.size(); ++k) {
    // Geometric decay with ratio about 1/4.
    const double ratio = s.terms[k] / s.terms[k - 1];
    CHECK(ratio == doctest::Approx(0.25).epsilon(0.05));
  }
  const std::size_t n = s.accelerated.size();
  CHECK(std::abs(s.accelerated[n - 1] - s.accelerated[n - 2]) <= 1e-14);
}

TEST_CASE("panel count is the smallest odd integer not below |m|") {
  CHECK(quadrature_panel_count({0, 0}) == 1);
  CHECK(quadrature_panel_count({1, 0}) == 1);
  CHECK(quadrature_panel_count({2, 0}) == 3);
  CHECK(quadrature_panel_count({3, 4}) == 5);
  CHECK(quadrature_panel_count({6, 0}) == 7);
}

TEST_CASE("phi_asymptotic") {
  CHECK_THROWS_AS(phi_asymptotic({0, 0}), Error);
  CHECK(phi_asymptotic({31, 17}) == phi_asymptotic({17, 31}));
  CHECK(phi_asymptotic({-31, 17}) == phi_asymptotic({31, -17}));
  // The truncation error decays like |m|^-6 with constant below 0.2.
  for (const LatticePoint m : {LatticePoint{20, 0}, LatticePoint{30, 0}, LatticePoint{35, 10}, LatticePoint{30, 20},
                               LatticePoint{21, 21}, LatticePoint{45, 0}}) {
    const double r2 = static_cast<double>(m.m1 * m.m1 + m.m2 * m.m2);
    INFO(to_string(m));
    CHECK(std::abs(phi_asymptotic(m) - phi_quadrature(m)) <= 0.2 / (r2 * r2 * r2));
  }
}

TEST_CASE("asymptotic handoff at the default table radius is continuous to 1e-12") {
  for (const LatticePoint m : {LatticePoint{97, 0}, LatticePoint{97, 41}, LatticePoint{97, 97}}) {
    INFO(to_string(m));
    CHECK(std::abs(phi_asymptotic(m) - phi_quadrature(m)) <= 1e-12);
  }
}

TEST_CASE("small tables") {
  const GreensTable t1 = GreensTable::build(1);
  REQUIRE(t1.entry_count() == 3);
  CHECK(t1.octant()[0] == 0.0);
  CHECK(t1.octant()[1] == -0.25);
  CHECK(t1.octant()[2] == doctest::Approx(-1.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(GreensTable::build(30).entry_count() == 496);
  CHECK_THROWS_AS(GreensTable::build(0), Error);
}

TEST_CASE("table lookup folds the eight symmetries") {
  const GreensTable& t = table();
  CHECK(t.lookup({-5, 3}) == t.lookup({5, 3}));
  CHECK(t.lookup({5, 3}) == t.lookup({3, 5}));
  CHECK(t.lookup({-3, -5}) == t.lookup({5, 3}));
  CHECK(std::abs(phi({10, -7}, t) - phi_quadrature({10, 7})) <= 1e-15);
  CHECK(phi({0, 0}, t) == 0.0);
}

TEST_CASE("phi routes outside the table to the expansion") {
  const GreensTable& t = table();
  const int r = t.radius();
  CHECK(phi({r + 1, 0}, t) == phi_asymptotic({r + 1, 0}));
  CHECK(phi({r, r}, t) == t.lookup({r, r}));
}

TEST_CASE("table values against the line-integral oracle") {
  const GreensTable& t = table();
  for (std::int64_t a = 0; a <= t.radius(); a += 7) {
    for (std::int64_t b = 0; b <= a; b += 5) {
      INFO(a << "," << b);
      CHECK(std::abs(t.lookup({a, b}) - phi_line_integral(a, b)) <= 1e-13);
    }
  }
}

TEST_CASE("fundamental-solution identity over the table and across the handoff") {
  const GreensTable& t = table();
  const auto f = [&](const LatticePoint& m) { return phi(m, t); };
  double worst = 0.0;
  const std::int64_t r = t.radius() + 3;
  for (std::int64_t x = -r; x <= r; ++x) {
    for (std::int64_t y = -r; y <= r; ++y) {
      const double delta = (x == 0 && y == 0) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(apply_discrete_laplacian(f, {x, y}) - delta));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("discrete Laplacian on maps") {
  LatticeField u;
  for (std::int64_t x = -1; x <= 1; ++x) {
    for (std::int64_t y = -1; y <= 1; ++y) u[{x, y}] = 3.5;
  }
  CHECK(apply_discrete_laplacian(u, {0, 0}) == 0.0);
  CHECK_THROWS_AS(apply_discrete_laplacian(u, {1, 1}), Error);

  LatticeField g;
  for (const LatticePoint m : {LatticePoint{0, 0}, LatticePoint{1, 0}, LatticePoint{-1, 0}, LatticePoint{0, 1},
                               LatticePoint{0, -1}}) {
    g[m] = phi(m, table());
  }
  CHECK(apply_discrete_laplacian(g, {0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  const auto f = [](const LatticePoint& m) { return phi(m, table()); };
  CHECK(std::abs(apply_discrete_laplacian(f, {3, 2})) <= 1e-12);
}

TEST_CASE("table files round-trip and detect corruption") {
  const auto dir = std::filesystem::temp_directory_path() / "lfmm_table_test";
  std::filesystem::remove_all(dir);
  const GreensTable t = GreensTable::build(12);
  t.save(dir);
  REQUIRE(std::filesystem::exists(dir / GreensTable::file_name(12)));
  REQUIRE(std::filesystem::exists(dir / GreensTable::sidecar_name(12)));
  CHECK(std::filesystem::file_size(dir / GreensTable::file_name(12)) == 8 * (1 + t.entry_count()));

  const GreensTable back = GreensTable::load(dir, 12);
  CHECK(back.checksum() == t.checksum());
  CHECK(std::equal(back.octant().begin(), back.octant().end(), t.octant().begin()));
  CHECK(GreensTable::load_or_build(dir, 12).checksum() == t.checksum());

  {
    std::fstream f(dir / GreensTable::file_name(12), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8 + 8 * 5);
    const char junk = 0x5a;
    f.write(&junk, 1);
  }
  try {
    (void)GreensTable::load_or_build(dir, 12);
    FAIL("corrupted table was accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("table checksum mismatch") != std::string::npos);
  }
  CHECK_THROWS_AS(GreensTable::load(dir, 13), Error);
  std::filesystem::remove_all(dir);
}
