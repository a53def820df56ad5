#include <algorithm>
#include <cstring>
#include <iostream>
#include <string>

#include "dosm/verify.hpp"

// Usage: acceptance [--quick] [--jobs k] [--known-shortfall id]... [suite]...
// A known shortfall is still run and reported as FAIL; it only stops that
// one failure from turning the exit status nonzero.
int main(int argc, char** argv) {
  using namespace dosm::cli;
  Scale scale = Scale::Full;
  int jobs = 1;
  std::vector<int> ids, known;
  try {
    for (int k = 1; k < argc; ++k) {
      if (std::strcmp(argv[k], "--quick") == 0)
        scale = Scale::Quick;
      else if (std::strcmp(argv[k], "--jobs") == 0 && k + 1 < argc)
        jobs = std::stoi(argv[++k]);
      else if (std::strcmp(argv[k], "--known-shortfall") == 0 && k + 1 < argc)
        known.push_back(suite_id(argv[++k]));
      else
        ids.push_back(suite_id(argv[k]));
    }
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
  int failed = 0, shortfalls = 0;
  run_suites(scale, ids, jobs, [&](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
    if (r.pass) return;
    if (std::find(known.begin(), known.end(), r.id) != known.end())
      ++shortfalls;
    else
      ++failed;
  });
  std::cout << "summary: " << failed << " unexpected failure(s), " << shortfalls
            << " documented shortfall(s)" << std::endl;
  return failed == 0 ? 0 : 1;
}
