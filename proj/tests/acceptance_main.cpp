// One line per acceptance criterion; nonzero exit when any criterion fails.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "shocklab/shocklab.h"

int main(int argc, char** argv) {
  std::string out = "acceptance_runs", configs = SHOCKLAB_CONFIGS_DIR;
  std::vector<int> ids;
  int jobs = 1;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) out = argv[++i];
    else if (a == "--configs" && i + 1 < argc) configs = argv[++i];
    else if (a == "--jobs" && i + 1 < argc) jobs = std::atoi(argv[++i]);
    else if (a == "--criterion" && i + 1 < argc) ids.push_back(std::atoi(argv[++i]));
    else {
      std::fprintf(stderr, "usage: acceptance [--out DIR] [--configs DIR] [--jobs N] [--criterion K]...\n");
      return 2;
    }
  }
  shocklab_acceptance* acc = nullptr;
  int rc = shocklab_acceptance_run(ids.data(), ids.size(), configs.c_str(), out.c_str(), jobs, 1, &acc);
  if (rc) {
    std::printf("acceptance aborted: %s (%s)\n", shocklab_last_error(), shocklab_status_name(rc));
    return 1;
  }
  int failed = 0;
  for (size_t i = 0; i < shocklab_acceptance_count(acc); ++i) {
    int id = 0, pass = 0;
    const char *line = nullptr, *details = nullptr;
    shocklab_acceptance_result(acc, i, &id, &pass, &line, &details);
    std::printf("%s\n", line);
    std::fputs(details, stdout);
    std::fflush(stdout);
    failed += !pass;
  }
  shocklab_acceptance_destroy(acc);
  std::printf("%zu criteria, %d failed\n", ids.empty() ? size_t{11} : ids.size(), failed);
  return failed ? 1 : 0;
}
