#pragma once

// Self-contained property suite behind the `verify` command: each property
// re-derives one mathematical guarantee of the solvers on freshly drawn
// instances (plus the fixed benchmarks) and reports pass/fail with a
// diagnostic. Property names are stable identifiers; the drawn instances
// depend only on the seed.

#include <string>
#include <vector>

namespace bilyap {

struct PropertyResult {
  std::string name;
  bool pass = false;
  int checks = 0;      // individual assertions evaluated inside the property
  std::string detail;  // first failing assertion, or empty when passing
};

// Runs every property with instances derived from `seed`. Never throws:
// an exception inside a property marks it failed with the message as detail.
std::vector<PropertyResult> run_verify_suite(unsigned seed = 20160318);

bool all_passed(const std::vector<PropertyResult>& results);

}  // namespace bilyap
