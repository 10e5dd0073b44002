#pragma once

// End-to-end acceptance checks, shared by the test suite and `selftest`.

#include <functional>
#include <string>
#include <vector>

#include "lfmm/fmm.hpp"
#include "lfmm/green.hpp"

namespace lfmm {

struct AcceptanceConfig {
  double eps = 1e-10;
  FmmOptions fmm;
  /// Nullptr builds a fresh table of radius table_radius inside criterion 1.
  const GreensTable* table = nullptr;
  int table_radius = kDefaultTableRadius;
  std::uint64_t seed = 20240611;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs every criterion in order; a criterion that throws is a failure.
/// `report` is called as each one finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& config,
                                            const std::function<void(const CriterionResult&)>& report = {});

std::string format_result(const CriterionResult& r);

}  // namespace lfmm
