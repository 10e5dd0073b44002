#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lfmm/bench.hpp"
#include "lfmm/io.hpp"

using namespace lfmm;

TEST_CASE("csv parsing") {
  std::istringstream in("# comment\n1,2,3.5\n\n -4 , 5 ,-6e-1\n");
  const auto rows = read_csv(in, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1] == std::vector<double>{-4.0, 5.0, -0.6});

  std::istringstream with_header("m1,m2\n7,8\n");
  CHECK(read_csv(with_header, 2, true).size() == 1);

  std::istringstream named("m1,m2,q\n1,2,3\n");
  CHECK(read_csv(named, 3).size() == 1);

  std::istringstream wrong("1,2\n");
  CHECK_THROWS_AS(read_csv(wrong, 3), Error);
  std::istringstream junk("1,x,3\n");
  CHECK_THROWS_AS(read_csv(junk, 3), Error);
}

TEST_CASE("file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "lfmm_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "s.csv");
    f << "0,0,1\n3,-4,-0.5\n";
  }
  const SourceSet s = read_sources(dir / "s.csv");
  CHECK(s.points == std::vector<LatticePoint>{{0, 0}, {3, -4}});
  const std::vector<double> u{0.1234567890123456789, -2.0};
  write_values(dir / "u.csv", s.points, u);
  std::ifstream back(dir / "u.csv");
  std::string line;
  std::getline(back, line);
  CHECK(line == "0,0,0.12345678901234568");
  std::ostringstream os;
  write_values(os, s.points, u, "m1,m2,u");
  CHECK(os.str().starts_with("m1,m2,u\n"));

  {
    std::ofstream f(dir / "bad.csv");
    f << "0.5,0,1\n";
  }
  CHECK_THROWS_AS(read_sources(dir / "bad.csv"), Error);
  {
    std::ofstream f(dir / "dup.csv");
    f << "1,1,1\n1,1,2\n";
  }
  CHECK_THROWS_AS(read_sources(dir / "dup.csv"), Error);
  {
    std::ofstream f(dir / "bars.csv");
    f << "0,0,1,0,-1\n";
  }
  const auto bars = read_bars(dir / "bars.csv");
  REQUIRE(bars.size() == 1);
  CHECK(bars[0].b == LatticePoint{1, 0});
  CHECK(bars[0].delta == -1.0);
  CHECK_THROWS_AS(read_points(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("load distributions") {
  CHECK(generate_sources(Distribution::dense, 64, 0.0, 1).size() == 4096);
  CHECK(generate_sources(Distribution::random, 1024, 0.0, 1).size() == 1024);
  CHECK(generate_sources(Distribution::circle, 1024, 0.25, 1).size() == 256);

  const SourceSet a = generate_sources(Distribution::random, 256, 0.0, 9);
  const SourceSet b = generate_sources(Distribution::random, 256, 0.0, 9);
  CHECK(a.points == b.points);
  CHECK(a.charges == b.charges);
  CHECK_NOTHROW(a.validate());
  for (const auto& p : a.points) {
    CHECK(p.m1 >= 0);
    CHECK(p.m1 < 256);
  }
  const SourceSet c = generate_sources(Distribution::circle, 256, 1.0, 2);
  for (const auto& p : c.points) {
    const double r = std::hypot(p.m1 - 127.5, p.m2 - 127.5);
    CHECK(std::abs(r - 127.5) <= 1.0);
  }

  CHECK(parse_distribution("circle") == Distribution::circle);
  CHECK_THROWS_AS(parse_distribution("gaussian"), Error);
  CHECK_THROWS_AS(generate_sources(Distribution::random, 100, 0.0, 1), Error);
}
