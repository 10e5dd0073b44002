#pragma once

// Comma-separated text I/O.  Blank lines and lines starting with '#' are
// skipped on input, as is a first line that starts with a letter.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "lfmm/defect.hpp"
#include "lfmm/lattice.hpp"

namespace lfmm {

/// Rows of numeric fields; each row must have exactly `columns` entries.
std::vector<std::vector<double>> read_csv(std::istream& in, std::size_t columns, bool header = false);

/// Lines m1,m2,q.
SourceSet read_sources(const std::filesystem::path& path, bool header = false);
/// Lines m1,m2.
std::vector<LatticePoint> read_points(const std::filesystem::path& path, bool header = false);
/// Lines a1,a2,b1,b2,dc.
std::vector<Bar> read_bars(const std::filesystem::path& path, bool header = false);

/// Lines m1,m2,value at 17 significant digits.
void write_values(std::ostream& out, std::span<const LatticePoint> points, std::span<const double> values,
                  const char* header = nullptr);
void write_values(const std::filesystem::path& path, std::span<const LatticePoint> points,
                  std::span<const double> values, const char* header = nullptr);

}  // namespace lfmm
