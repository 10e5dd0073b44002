// Runs every acceptance criterion and prints one line per criterion.
// Exit status is the number of failed criteria.

#include <cstdlib>
#include <iostream>

#include "lfmm/acceptance.hpp"

int main(int argc, char** argv) {
  lfmm::AcceptanceConfig config;
  if (argc > 1) config.eps = std::strtod(argv[1], nullptr);
  int failed = 0;
  lfmm::run_acceptance(config, [&](const lfmm::CriterionResult& r) {
    std::cout << lfmm::format_result(r) << std::endl;
    failed += r.passed ? 0 : 1;
  });
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed;
}
