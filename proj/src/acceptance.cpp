#include "lfmm/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <random>
#include <unordered_set>

#include "lfmm/bench.hpp"
#include "lfmm/defect.hpp"
#include "lfmm/oracle.hpp"
#include "lfmm/skeleton.hpp"

namespace lfmm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double relative_l2(const std::vector<double>& approx, const std::vector<double>& exact) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (approx[i] - exact[i]) * (approx[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  return std::sqrt(num / den);
}

SourceSet uniform_sources(std::size_t n, std::int64_t side, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> coord(0, side - 1);
  std::uniform_real_distribution<double> charge(-1.0, 1.0);
  std::unordered_set<LatticePoint, LatticePointHash> seen;
  SourceSet s;
  while (s.size() < n) {
    const LatticePoint p{coord(rng), coord(rng)};
    if (!seen.insert(p).second) continue;
    s.points.push_back(p);
    s.charges.push_back(charge(rng));
  }
  return s;
}

LatticeField field_of(std::span<const LatticePoint> points, std::span<const double> values) {
  LatticeField f;
  for (std::size_t i = 0; i < points.size(); ++i) f.emplace(points[i], values[i]);
  return f;
}

CriterionResult named(int id, const char* name) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  return r;
}

struct Context {
  AcceptanceConfig config;
  std::unique_ptr<GreensTable> owned;
  const GreensTable* table = nullptr;
  double fmm_tol = 1e-9;

  FmmOptions fmm() const {
    FmmOptions o = config.fmm;
    o.eps = config.eps;
    return o;
  }
};

CriterionResult green_identity(Context& ctx) {
  CriterionResult r = named(1, "green-function identity");
  const auto t0 = Clock::now();
  if (ctx.table == nullptr) {
    ctx.owned = std::make_unique<GreensTable>(GreensTable::build(ctx.config.table_radius));
    ctx.table = ctx.owned.get();
  }
  const GreensTable& table = *ctx.table;
  double worst = 0.0;
  const auto field = [&](const LatticePoint& m) { return phi(m, table); };
  for (std::int64_t x = -50; x <= 50; ++x) {
    for (std::int64_t y = -50; y <= 50; ++y) {
      const LatticePoint m{x, y};
      const double delta = (x == 0 && y == 0) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(apply_discrete_laplacian(field, m) - delta));
    }
  }
  r.seconds = seconds_since(t0);
  r.passed = worst <= 1e-12 && r.seconds < 60.0;
  r.detail = fmt("max |A phi - delta| = %.2e over |m|inf <= 50 (tol 1e-12), table radius %d", worst, table.radius());
  return r;
}

CriterionResult asymptotic_accuracy(Context&) {
  CriterionResult r = named(2, "asymptotic accuracy");
  const auto t0 = Clock::now();
  double worst = 0.0;
  LatticePoint where;
  // The expansion and the integral are both symmetric, so the octant suffices.
  for (std::int64_t x = 0; x <= 45; ++x) {
    for (std::int64_t y = 0; y <= x; ++y) {
      const std::int64_t r2 = x * x + y * y;
      if (r2 <= 30 * 30 || r2 > 45 * 45) continue;
      const LatticePoint m{x, y};
      const double diff = std::abs(phi_quadrature(m) - phi_asymptotic(m));
      if (diff > worst) {
        worst = diff;
        where = m;
      }
    }
  }
  r.seconds = seconds_since(t0);
  r.passed = worst <= 1e-12;
  r.detail = fmt("max |quadrature - asymptotic| = %.2e at %s for 30 < |m| <= 45 (tol 1e-12)", worst,
                 to_string(where).c_str());
  return r;
}

CriterionResult known_values(Context& ctx) {
  CriterionResult r = named(3, "known values");
  const auto t0 = Clock::now();
  const GreensTable& table = *ctx.table;
  const double e00 = std::abs(phi({0, 0}, table));
  const double e10 = std::abs(phi({1, 0}, table) + 0.25);
  const double e11 = std::abs(phi({1, 1}, table) + 1.0 / std::numbers::pi);
  const double q10 = std::abs(phi_quadrature({1, 0}) + 0.25);
  const double q11 = std::abs(phi_quadrature({1, 1}) + 1.0 / std::numbers::pi);
  r.seconds = seconds_since(t0);
  r.passed = e00 <= 1e-14 && e10 <= 1e-14 && q10 <= 1e-14 && e11 <= 1e-13 && q11 <= 1e-13;
  r.detail = fmt("errors phi(0,0) %.1e, phi(1,0) %.1e, phi(1,1) %.1e (tol 1e-14, 1e-14, 1e-13)", e00,
                 std::max(e10, q10), std::max(e11, q11));
  return r;
}

CriterionResult fmm_equivalence(Context& ctx) {
  CriterionResult r = named(4, "fmm-oracle equivalence");
  const auto t0 = Clock::now();
  std::mt19937_64 rng(ctx.config.seed);
  const std::size_t sizes[] = {100, 500, 2000};
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const SourceSet s = uniform_sources(sizes[instance % 3], std::int64_t{1} << 15, rng);
    const std::vector<double> u = fmm_apply(s, *ctx.table, ctx.fmm());
    worst = std::max(worst, relative_l2(u, direct_sum(s, s.points, *ctx.table)));
  }
  r.seconds = seconds_since(t0);
  r.passed = worst <= ctx.fmm_tol && r.seconds < 120.0;
  r.detail = fmt("worst relative l2 error %.2e over 20 instances (tol %.0e), eps %.0e", worst, ctx.fmm_tol,
                 ctx.config.eps);
  return r;
}

CriterionResult rank_band(Context& ctx) {
  CriterionResult r = named(5, "rank band");
  const auto t0 = Clock::now();
  // Four consecutive levels above a side-16 leaf: sides 16, 32, 64, 128.
  bool ok = true;
  std::string detail;
  for (const auto& [eps, lo, hi] : {std::tuple{1e-10, 30, 55}, std::tuple{1e-6, 15, 30}}) {
    const OperatorHierarchy h = build_operator_hierarchy(3, 16, 0, *ctx.table, {eps, ctx.config.fmm.proxy_per_edge});
    std::size_t rmin = SIZE_MAX, rmax = 0;
    detail += fmt("eps %.0e ranks", eps);
    for (int level = 3; level >= 0; --level) {
      const std::size_t p = h.levels[static_cast<std::size_t>(level)].skeleton.rank();
      rmin = std::min(rmin, p);
      rmax = std::max(rmax, p);
      detail += fmt(" %zu", p);
    }
    const std::size_t leaf = h.levels[3].skeleton.rank();
    const bool in_band = static_cast<int>(leaf) >= lo && static_cast<int>(leaf) <= hi && rmax - rmin <= 5;
    detail += fmt(" (band [%d, %d]); ", lo, hi);
    ok = ok && in_band;
  }
  r.seconds = seconds_since(t0);
  r.passed = ok;
  r.detail = detail + "spread tol 5";
  return r;
}

CriterionResult linear_scaling(Context& ctx, std::vector<BenchRow>& rows) {
  CriterionResult r = named(6, "linear scaling");
  const auto t0 = Clock::now();
  std::vector<TimingSample> samples;
  for (int e : {14, 16, 18}) {
    const std::int64_t n = std::int64_t{1} << e;
    rows.push_back(run_bench(Distribution::random, n, 0.0, ctx.config.seed, *ctx.table, ctx.fmm()));
    samples.push_back({static_cast<double>(rows.back().n_source), rows.back().wall_time});
  }
  const ScalingReport scaling = estimate_complexity(samples);

  // 10^4 sources scattered over a 10^6 x 10^6 domain.
  std::mt19937_64 rng(ctx.config.seed + 1);
  const SourceSet s = uniform_sources(10000, 1000000, rng);
  const FmmPlan plan(s.points, *ctx.table, ctx.fmm());
  const std::vector<double> u = plan.apply(s.charges);
  std::vector<LatticePoint> probes;
  std::vector<double> probed;
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  for (int k = 0; k < 100; ++k) {
    const std::size_t i = pick(rng);
    probes.push_back(s.points[i]);
    probed.push_back(u[i]);
  }
  const double err = relative_l2(probed, direct_sum(s, probes, *ctx.table));

  r.seconds = seconds_since(t0);
  r.passed = scaling.slope <= 1.25 && err <= ctx.fmm_tol;
  r.detail = fmt("slope %.3f (tol 1.25) from times %.2fs %.2fs %.2fs; 1e12-node domain depth %d, error %.2e (tol %.0e)",
                 scaling.slope, samples[0].seconds, samples[1].seconds, samples[2].seconds, plan.tree().depth(), err,
                 ctx.fmm_tol);
  return r;
}

CriterionResult memory_linearity(const std::vector<BenchRow>& rows) {
  CriterionResult r = named(7, "memory linearity");
  double lo = INFINITY, hi = 0.0;
  std::string per;
  for (const auto& row : rows) {
    const double b = static_cast<double>(row.mem_estimate) / static_cast<double>(row.n_source);
    lo = std::min(lo, b);
    hi = std::max(hi, b);
    per += fmt(" %.0f", b);
  }
  r.passed = rows.size() == 3 && hi <= 2.0 * lo;
  r.detail = fmt("bytes per source%s, ratio %.2f (tol 2)", per.c_str(), hi / lo);
  return r;
}

CriterionResult defect_solver(Context& ctx) {
  CriterionResult r = named(8, "defect solver");
  const auto t0 = Clock::now();
  DefectOptions options;
  options.fmm = ctx.fmm();
  options.tol = 1e-12;

  std::vector<LatticePoint> window;
  for (std::int64_t x = -21; x <= 21; ++x) {
    for (std::int64_t y = -21; y <= 21; ++y) window.push_back({x, y});
  }

  // (a) no defect
  const FarField far{0.7, -1.3};
  const std::vector<double> u0 = solve_defect(DefectSpec{}, far, window, *ctx.table, options);
  double err_a = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) err_a = std::max(err_a, std::abs(u0[i] - far(window[i])));

  // (b) one removed bar
  const DefectSpec bar({{{0, 0}, {1, 0}, -1.0}});
  const std::vector<double> u1 = solve_defect(bar, FarField{1.0, 0.0}, window, *ctx.table, options);
  const LatticeField f1 = field_of(window, u1);
  double err_b = 0.0;
  for (std::int64_t x = -20; x <= 20; ++x) {
    for (std::int64_t y = -20; y <= 20; ++y) err_b = std::max(err_b, std::abs(perturbed_residual(bar, f1, {x, y})));
  }

  // (c) S A w = w for w on 20 random nodes
  std::mt19937_64 rng(ctx.config.seed + 2);
  std::uniform_int_distribution<std::int64_t> coord(-40, 40);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  LatticeField w;
  while (w.size() < 20) w.emplace(LatticePoint{coord(rng), coord(rng)}, value(rng));
  const auto wf = [&](const LatticePoint& m) {
    const auto it = w.find(m);
    return it == w.end() ? 0.0 : it->second;
  };
  LatticeField aw;
  std::vector<LatticePoint> targets;
  for (const auto& [m, v] : w) {
    for (const LatticePoint d : {LatticePoint{0, 0}, LatticePoint{1, 0}, LatticePoint{-1, 0}, LatticePoint{0, 1},
                                 LatticePoint{0, -1}}) {
      const LatticePoint p = m + d;
      if (aw.contains(p)) continue;
      aw.emplace(p, apply_discrete_laplacian(wf, p));
      targets.push_back(p);
    }
  }
  const std::vector<double> saw = apply_S(aw, targets, *ctx.table, options);
  double err_c = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) err_c = std::max(err_c, std::abs(saw[i] - wf(targets[i])));

  r.seconds = seconds_since(t0);
  const double tol_c = std::max(1e-9, 10.0 * ctx.config.eps);
  r.passed = err_a <= 1e-14 && err_b <= 1e-8 && err_c <= tol_c && r.seconds < 60.0;
  r.detail = fmt("(a) max |u - v| %.1e (tol 1e-14); (b) max residual %.2e within radius 20 (tol 1e-8); "
                 "(c) max |SAw - w| %.2e (tol %.0e)",
                 err_a, err_b, err_c, tol_c);
  return r;
}

CriterionResult pde_residual(Context& ctx) {
  CriterionResult r = named(9, "pde residual");
  const auto t0 = Clock::now();
  SourceSet s;
  s.points = {{0, 0}, {1, 0}, {-4100, 2917}};
  s.charges = {1.5, -2.0, 0.5};
  std::vector<LatticePoint> targets;
  for (const auto& m : s.points) {
    for (const LatticePoint d : {LatticePoint{0, 0}, LatticePoint{1, 0}, LatticePoint{-1, 0}, LatticePoint{0, 1},
                                 LatticePoint{0, -1}}) {
      targets.push_back(m + d);
    }
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  // One point per leaf pushes the far field through every level of the tree.
  FmmOptions options = ctx.fmm();
  options.leaf_capacity = 1;
  const std::vector<double> u = fmm_evaluate(s, targets, *ctx.table, options);
  const LatticeField field = field_of(targets, u);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    worst = std::max(worst, std::abs(apply_discrete_laplacian(field, s.points[i]) - s.charges[i]));
  }
  r.seconds = seconds_since(t0);
  const double tol = std::max(1e-9, 10.0 * ctx.config.eps);
  r.passed = worst <= tol;
  r.detail = fmt("max |A u - f| at the sources %.2e (tol %.0e)", worst, tol);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& config,
                                            const std::function<void(const CriterionResult&)>& report) {
  Context ctx;
  ctx.config = config;
  ctx.table = config.table;
  ctx.fmm_tol = std::max(1e-9, 10.0 * config.eps);
  std::vector<BenchRow> rows;

  std::vector<CriterionResult> results;
  auto run = [&](int id, const char* name, auto&& body) {
    CriterionResult r;
    const auto t0 = Clock::now();
    try {
      r = body();
    } catch (const std::exception& e) {
      r = CriterionResult{id, name, false, std::string("error: ") + e.what(), seconds_since(t0)};
    }
    if (report) report(r);
    results.push_back(std::move(r));
  };

  run(1, "green-function identity", [&] { return green_identity(ctx); });
  if (ctx.table == nullptr) {
    ctx.owned = std::make_unique<GreensTable>(GreensTable::build(config.table_radius));
    ctx.table = ctx.owned.get();
  }
  run(2, "asymptotic accuracy", [&] { return asymptotic_accuracy(ctx); });
  run(3, "known values", [&] { return known_values(ctx); });
  run(4, "fmm-oracle equivalence", [&] { return fmm_equivalence(ctx); });
  run(5, "rank band", [&] { return rank_band(ctx); });
  run(6, "linear scaling", [&] { return linear_scaling(ctx, rows); });
  run(7, "memory linearity", [&] {
    const auto t0 = Clock::now();
    CriterionResult r = memory_linearity(rows);
    r.seconds = seconds_since(t0);
    return r;
  });
  run(8, "defect solver", [&] { return defect_solver(ctx); });
  run(9, "pde residual", [&] { return pde_residual(ctx); });
  return results;
}

std::string format_result(const CriterionResult& r) {
  return fmt("[%s] %d %s: %s (%.2fs)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
}

}  // namespace lfmm
