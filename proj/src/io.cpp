#include "lfmm/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace lfmm {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::int64_t as_integer(double x, std::size_t line) {
  if (x != std::floor(x) || std::abs(x) > 9.0e15) {
    throw Error("line " + std::to_string(line) + ": lattice coordinate is not an integer");
  }
  return static_cast<std::int64_t>(x);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::vector<std::vector<double>> read_csv(std::istream& in, std::size_t columns, bool header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t number = 0;
  bool expect_header = true;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    // The first data line is a header when requested or when it starts with a letter.
    if (expect_header && (header || std::isalpha(static_cast<unsigned char>(line[0])))) {
      expect_header = false;
      continue;
    }
    expect_header = false;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      field = trim(field);
      double value = 0.0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || end != field.data() + field.size()) {
        throw Error("line " + std::to_string(number) + ": cannot parse '" + field + "'");
      }
      row.push_back(value);
    }
    if (row.size() != columns) {
      throw Error("line " + std::to_string(number) + ": expected " + std::to_string(columns) + " fields, found " +
                  std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SourceSet read_sources(const std::filesystem::path& path, bool header) {
  auto in = open_input(path);
  SourceSet s;
  std::size_t line = 0;
  for (const auto& r : read_csv(in, 3, header)) {
    ++line;
    s.points.push_back({as_integer(r[0], line), as_integer(r[1], line)});
    s.charges.push_back(r[2]);
  }
  s.validate();
  return s;
}

std::vector<LatticePoint> read_points(const std::filesystem::path& path, bool header) {
  auto in = open_input(path);
  std::vector<LatticePoint> p;
  std::size_t line = 0;
  for (const auto& r : read_csv(in, 2, header)) {
    ++line;
    p.push_back({as_integer(r[0], line), as_integer(r[1], line)});
  }
  return p;
}

std::vector<Bar> read_bars(const std::filesystem::path& path, bool header) {
  auto in = open_input(path);
  std::vector<Bar> bars;
  std::size_t line = 0;
  for (const auto& r : read_csv(in, 5, header)) {
    ++line;
    bars.push_back({{as_integer(r[0], line), as_integer(r[1], line)}, {as_integer(r[2], line), as_integer(r[3], line)}, r[4]});
  }
  return bars;
}

void write_values(std::ostream& out, std::span<const LatticePoint> points, std::span<const double> values,
                  const char* header) {
  if (points.size() != values.size()) throw Error("write_values: length mismatch");
  if (header != nullptr) out << header << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < points.size(); ++i) out << points[i].m1 << ',' << points[i].m2 << ',' << values[i] << '\n';
}

void write_values(const std::filesystem::path& path, std::span<const LatticePoint> points,
                  std::span<const double> values, const char* header) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_values(out, points, values, header);
}

}  // namespace lfmm
