#pragma once

// Built-in invariant suites. Every invariant is measured on seeded random
// instances and reported as one line: the measured value, the comparison and
// the tolerance. Output depends only on (suite, seed).

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ncot {

struct CheckLine {
  std::string suite;
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=" or ">"
  double bound = 0.0;
  bool pass = false;
};

struct CheckSummary {
  std::vector<CheckLine> lines;
  int failures() const;
};

const std::vector<std::string>& check_suites();

// `suite` is one of check_suites() or "all"; anything else throws UsageError.
// Lines are written to `out` as they complete.
CheckSummary run_checks(const std::string& suite, std::uint64_t seed, std::ostream& out);

std::string format_check_line(const CheckLine& line);

}  // namespace ncot
