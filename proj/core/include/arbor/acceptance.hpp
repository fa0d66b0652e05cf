#pragma once

#include <string>
#include <vector>

namespace arbor {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the full verification suite; one result per criterion.
std::vector<CriterionResult> run_acceptance();

/// Prints one pass/fail line per criterion to stdout; returns the number of
/// failures.
int report_acceptance(const std::vector<CriterionResult>& results);

}  // namespace arbor
