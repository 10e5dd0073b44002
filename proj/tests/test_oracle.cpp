#include <doctest.h>

#include <numbers>

#include "lfmm/fmm.hpp"
#include "lfmm/oracle.hpp"
#include "support.hpp"

using namespace lfmm;
using lfmm::testing::random_sources;
using lfmm::testing::relative_l2;
using lfmm::testing::table;

TEST_CASE("direct sum examples") {
  const SourceSet unit{{{0, 0}}, {1.0}};
  const LatticePoint t[] = {{1, 1}};
  CHECK(std::abs(direct_sum(unit, t, table())[0] + 1.0 / std::numbers::pi) <= 1e-15);

  const SourceSet dipole{{{0, 0}, {1, 0}}, {1.0, -1.0}};
  const LatticePoint far[] = {{1000000, 0}};
  CHECK(std::abs(direct_sum(dipole, far, table())[0]) <= 1e-5);

  const SourceSet zero{{{0, 0}, {4, 5}}, {0.0, 0.0}};
  const LatticePoint some[] = {{0, 0}, {3, 3}, {-100, 7}};
  for (double v : direct_sum(zero, some, table())) CHECK(v == 0.0);
}

TEST_CASE("direct sum is reproducible") {
  const SourceSet s = random_sources(300, 2000, 12);
  CHECK(direct_sum(s, s.points, table()) == direct_sum(s, s.points, table()));
}

TEST_CASE("dense kernel matrix") {
  const SourceSet s = random_sources(200, 300, 13);
  const DenseKernelMatrix a(s.points, table());
  CHECK((a.matrix() - a.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.matrix().diagonal().isZero(0.0));
  const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(s.charges.data(), 200);
  const Eigen::VectorXd u = a.apply(q);
  const auto d = direct_sum(s, s.points, table());
  CHECK(relative_l2(std::vector<double>(u.data(), u.data() + u.size()), d) <= 1e-14);
}

TEST_CASE("dense truncated solve") {
  LatticeField single{{{0, 0}, 2.0}};
  CHECK(dense_solve_truncated(single, 0, table()).at({0, 0}) == 0.0);

  LatticeField two{{{0, 0}, 1.0}, {{3, -2}, -0.5}};
  const auto u = dense_solve_truncated(two, 5, table());
  const SourceSet s{{{0, 0}, {3, -2}}, {1.0, -0.5}};
  const auto d = direct_sum(s, s.points, table());
  CHECK(u.at({0, 0}) == doctest::Approx(d[0]).epsilon(1e-15));
  CHECK(u.at({3, -2}) == doctest::Approx(d[1]).epsilon(1e-15));

  const SourceSet r = random_sources(100, 41, 14, {-20, -20});
  LatticeField rhs;
  for (std::size_t i = 0; i < r.size(); ++i) rhs[r.points[i]] = r.charges[i];
  const auto w = dense_solve_truncated(rhs, 20, table());
  FmmOptions o;
  o.leaf_capacity = 4;
  const auto f = fmm_apply(r, table(), o);
  std::vector<double> dense;
  for (const auto& p : r.points) dense.push_back(w.at(p));
  CHECK(relative_l2(f, dense) <= 1e-9);

  CHECK_THROWS_AS(dense_solve_truncated(two, 2, table()), Error);
  LatticeField big;
  for (std::int64_t i = 0; i <= static_cast<std::int64_t>(kDenseOracleLimit); ++i) big[{i, 0}] = 1.0;
  CHECK_THROWS_AS(dense_solve_truncated(big, 100000, table()), Error);
}
