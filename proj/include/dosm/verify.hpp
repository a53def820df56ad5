#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dosm::cli {

enum class Scale { Quick, Full };

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// (id, suite name) for the twelve property suites.
const std::vector<std::pair<int, std::string>>& suites();
/// Accepts a suite name or a number; throws InputError otherwise.
int suite_id(const std::string& name);

using Progress = std::function<void(const CriterionResult&)>;

/// Runs the selected suites (all when `ids` is empty). Full scale uses the
/// sample sizes and horizons of the acceptance criteria; quick scale shrinks them.
std::vector<CriterionResult> run_suites(Scale scale, const std::vector<int>& ids, int jobs,
                                        const Progress& progress = {});

CriterionResult run_suite(int id, Scale scale, int jobs);

std::string format_result(const CriterionResult& r);

}  // namespace dosm::cli
