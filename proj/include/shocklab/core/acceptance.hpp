#pragma once

#include <string>
#include <vector>

namespace shocklab::acceptance {

struct Check {
  std::string name;
  double measured = 0.0;
  std::string target;
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<Check> checks;
  std::string error;  // set when the criterion aborted
  double seconds = 0.0;
};

struct Options {
  std::string configs_dir;  // bundled experiment configs
  std::string out_dir;      // run directories for experiment criteria
  int jobs = 1;             // concurrent experiment runs
  unsigned seed = 1;
};

inline constexpr int kCriterionCount = 11;

std::string criterion_title(int id);
CriterionResult run_criterion(int id, const Options& opt);
// Runs the listed criteria; independent experiment runs share `opt.jobs` workers.
std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const Options& opt);

// "criterion N: PASS|FAIL  title  [name=measured (target) ...]"
std::string format_line(const CriterionResult& r);
std::string format_details(const CriterionResult& r);

}  // namespace shocklab::acceptance
