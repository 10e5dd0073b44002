// lfmm: lattice Green's function queries, fast free-space solves, defect
// solves, benchmarks and the acceptance self-test.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lfmm/acceptance.hpp"
#include "lfmm/bench.hpp"
#include "lfmm/defect.hpp"
#include "lfmm/fmm.hpp"
#include "lfmm/green.hpp"
#include "lfmm/io.hpp"
#include "lfmm/oracle.hpp"

namespace fs = std::filesystem;
using namespace lfmm;

namespace {

struct RunConfig {
  double eps = 1e-10;
  std::size_t nleaf = kDefaultLeafCapacity;
  int rtable = kDefaultTableRadius;
  int proxy_per_edge = kDefaultProxyPerEdge;
  std::uint64_t seed = 1;
  std::string cache_dir;
  bool header = false;

  FmmOptions fmm() const { return {eps, nleaf, proxy_per_edge}; }
};

std::string default_cache_dir() {
  if (const char* d = std::getenv("LFMM_CACHE_DIR")) return d;
  if (const char* x = std::getenv("XDG_CACHE_HOME")) return (fs::path(x) / "lfmm").string();
  if (const char* h = std::getenv("HOME")) return (fs::path(h) / ".cache" / "lfmm").string();
  return ".lfmm-cache";
}

GreensTable load_table(const RunConfig& c) { return GreensTable::load_or_build(c.cache_dir, c.rtable); }

// Writes to the named file, or to stdout for an empty name or "-".
template <class F>
void with_output(const std::string& name, F&& body) {
  if (name.empty() || name == "-") {
    body(std::cout);
    return;
  }
  std::ofstream out(name);
  if (!out) throw Error("cannot write " + name);
  body(out);
}

// Environment defaults sit between built-in defaults and flags.
template <class T>
void env_default(const char* name, T& value, T lo, T hi) {
  const char* text = std::getenv(name);
  if (text == nullptr || *text == '\0') return;
  std::istringstream in(text);
  T parsed{};
  if (!(in >> parsed) || !(in >> std::ws).eof()) throw Error(std::string(name) + ": cannot parse '" + text + "'");
  if (parsed < lo || parsed > hi) throw Error(std::string(name) + ": value " + text + " out of range");
  value = parsed;
}

const char* header_or_null(const RunConfig& c, const char* h) { return c.header ? h : nullptr; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast summation for the lattice Green's function of the 2D five-point Laplacian"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.cache_dir = default_cache_dir();
  try {
    env_default("LFMM_EPS", cfg.eps, 1e-14, 1e-2);
    env_default<std::size_t>("LFMM_NLEAF", cfg.nleaf, 1, std::size_t{1} << 20);
  } catch (const Error& e) {
    std::fprintf(stderr, "lfmm: %s\n", e.what());
    return 2;
  }
  app.add_option("--eps", cfg.eps, "Requested relative precision (env LFMM_EPS)")
      ->check(CLI::Range(1e-14, 1e-2))
      ->capture_default_str();
  app.add_option("--nleaf", cfg.nleaf, "Maximum points per leaf box (env LFMM_NLEAF)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--rtable", cfg.rtable, "Radius of the tabulated Green's function")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  app.add_option("--proxy", cfg.proxy_per_edge, "Proxy points per edge")->check(CLI::Range(4, 4096))->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for generated inputs")->capture_default_str();
  app.add_option("--cache-dir", cfg.cache_dir, "Directory for table files")->capture_default_str();
  app.add_flag("--header", cfg.header, "Write a header line on CSV output");
  bool show_config = false;
  app.add_flag("--show-config", show_config, "Print the effective settings to stderr");

  // phi
  auto* phi_cmd = app.add_subcommand("phi", "Print phi(m1, m2)");
  std::int64_t m1 = 0, m2 = 0;
  bool quadrature = false;
  phi_cmd->add_option("m1", m1)->required();
  phi_cmd->add_option("m2", m2)->required();
  phi_cmd->add_flag("--quadrature", quadrature, "Evaluate the Fourier integral directly instead of the table");

  // solve / direct
  std::string input, output;
  auto* solve_cmd = app.add_subcommand("solve", "Potentials of point charges by the fast method");
  auto* direct_cmd = app.add_subcommand("direct", "Potentials of point charges by direct summation");
  for (auto* c : {solve_cmd, direct_cmd}) {
    c->add_option("--input", input, "CSV lines m1,m2,q")->required()->check(CLI::ExistingFile);
    c->add_option("--output", output, "CSV lines m1,m2,u (stdout if omitted)");
  }

  // defect
  auto* defect_cmd = app.add_subcommand("defect", "Lattice with modified bars in a linear far field");
  std::string bars_file, query_file;
  std::vector<double> farfield;
  double tol = 1e-8;
  defect_cmd->add_option("--bars", bars_file, "CSV lines a1,a2,b1,b2,dc")->required()->check(CLI::ExistingFile);
  defect_cmd->add_option("--farfield", farfield, "c1,c2 for v(m) = c1 m1 + c2 m2")->required()->delimiter(',')->expected(2);
  defect_cmd->add_option("--query", query_file, "CSV lines m1,m2")->required()->check(CLI::ExistingFile);
  defect_cmd->add_option("--tol", tol, "Relative residual of the reduced equation")->capture_default_str();
  defect_cmd->add_option("--output", output, "CSV lines m1,m2,u (stdout if omitted)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Time the fast method; CSV n,N_source,wall_time,mem_estimate");
  std::string dist = "random";
  std::vector<std::int64_t> sizes;
  double alpha = 0.25;
  bench_cmd->add_option("--dist", dist, "dense, random or circle")->capture_default_str();
  bench_cmd->add_option("--n", sizes, "Domain side, a power of two (repeatable)")->required();
  bench_cmd->add_option("--alpha", alpha, "Loaded fraction for the circle distribution")->capture_default_str();
  bench_cmd->add_option("--output", output, "CSV file (stdout if omitted)");

  // selftest
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the acceptance checks");

  // cache
  auto* cache_cmd = app.add_subcommand("cache", "Manage precomputed tables");
  cache_cmd->require_subcommand(1);
  auto* cache_build = cache_cmd->add_subcommand("build", "Build and store the table");
  auto* cache_clear = cache_cmd->add_subcommand("clear", "Remove stored tables");

  CLI11_PARSE(app, argc, argv);

  if (show_config) {
    std::fprintf(stderr, "eps=%g nleaf=%zu rtable=%d proxy=%d seed=%llu cache=%s\n", cfg.eps, cfg.nleaf, cfg.rtable,
                 cfg.proxy_per_edge, static_cast<unsigned long long>(cfg.seed), cfg.cache_dir.c_str());
  }

  try {
    if (*phi_cmd) {
      const LatticePoint m{m1, m2};
      double value;
      if (quadrature) {
        value = phi_quadrature(m);
      } else if (max_norm(m) > cfg.rtable) {
        value = phi_asymptotic(m);
      } else {
        value = phi(m, load_table(cfg));
      }
      std::printf("%.16g\n", value);
      return 0;
    }

    if (*solve_cmd || *direct_cmd) {
      const SourceSet sources = read_sources(input);
      const GreensTable table = load_table(cfg);
      const std::vector<double> u =
          *solve_cmd ? fmm_apply(sources, table, cfg.fmm()) : direct_sum(sources, sources.points, table);
      with_output(output, [&](std::ostream& os) { write_values(os, sources.points, u, header_or_null(cfg, "m1,m2,u")); });
      return 0;
    }

    if (*defect_cmd) {
      const DefectSpec spec(read_bars(bars_file));
      const std::vector<LatticePoint> queries = read_points(query_file);
      const GreensTable table = load_table(cfg);
      DefectOptions options;
      options.tol = tol;
      options.fmm = cfg.fmm();
      const DefectSolution sol = solve_reduced(spec, FarField{farfield[0], farfield[1]}, table, options);
      const std::vector<double> u = evaluate_solution(sol, queries, table, options);
      std::fprintf(stderr, "defect nodes %zu, iterations %d, relative residual %.3e\n", spec.nodes().size(),
                   sol.iterations, sol.relative_residual);
      with_output(output, [&](std::ostream& os) { write_values(os, queries, u, header_or_null(cfg, "m1,m2,u")); });
      return 0;
    }

    if (*bench_cmd) {
      const Distribution d = parse_distribution(dist);
      const GreensTable table = load_table(cfg);
      with_output(output, [&](std::ostream& os) {
        if (cfg.header) os << "n,N_source,wall_time,mem_estimate\n";
        for (std::int64_t n : sizes) {
          const BenchRow row = run_bench(d, n, alpha, cfg.seed, table, cfg.fmm());
          os << row.n << ',' << row.n_source << ',' << row.wall_time << ',' << row.mem_estimate << '\n' << std::flush;
        }
      });
      return 0;
    }

    if (*selftest_cmd) {
      const GreensTable table = load_table(cfg);
      AcceptanceConfig ac;
      ac.eps = cfg.eps;
      ac.fmm = cfg.fmm();
      ac.table = &table;
      ac.seed = cfg.seed;
      bool ok = true;
      run_acceptance(ac, [&](const CriterionResult& r) {
        std::cout << format_result(r) << std::endl;
        ok = ok && r.passed;
      });
      std::cout << (ok ? "selftest: all criteria passed" : "selftest: FAILED") << std::endl;
      return ok ? 0 : 1;
    }

    if (*cache_build) {
      const GreensTable table = load_table(cfg);
      std::cout << (fs::path(cfg.cache_dir) / GreensTable::file_name(table.radius())).string() << " ("
                << table.entry_count() << " entries)\n";
      return 0;
    }
    if (*cache_clear) {
      std::size_t removed = 0;
      if (fs::is_directory(cfg.cache_dir)) {
        for (const auto& e : fs::directory_iterator(cfg.cache_dir)) {
          const std::string name = e.path().filename().string();
          if (name.starts_with("phi_table_R") && (name.ends_with(".bin") || name.ends_with(".txt"))) {
            fs::remove(e.path());
            ++removed;
          }
        }
      }
      std::cout << "removed " << removed << " files from " << cfg.cache_dir << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lfmm: %s\n", e.what());
    return 1;
  }
  return 0;
}
