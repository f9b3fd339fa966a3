#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lgsim_app/config.hpp"

namespace lgsim::app {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

// Criteria run in quick mode.
inline constexpr int quick_criteria[] = {1, 2, 3, 9, 10};

// Runs the acceptance criteria (all ten, or the quick subset). `only`
// restricts the run to the listed ids when non-empty. Progress goes to log.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& cfg, bool quick,
                                            std::ostream& log, const std::vector<int>& only = {});

// One line per criterion: "criterion 7 PASS end-to-end violation: ...".
std::string format_result(const CriterionResult& r);

// JSON report (no timings, so identical inputs give identical files).
std::string report_json(const ExperimentConfig& cfg, const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

// Writes <out>/validate/report.json; returns 0 when every criterion run passed, else 1.
int cmd_validate(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace lgsim::app
