#include <cstdio>
#include <exception>

#include "htl/battery.hpp"

// Runs the acceptance battery and prints one verdict line per criterion.
// Optional argv[1] sets the report directory.
int main(int argc, char** argv) {
  htl::BatteryOptions opt;
  opt.out_dir = argc > 1 ? argv[1] : "acceptance-report";
  try {
    const auto results = htl::run_acceptance_battery(opt);
    bool all = true;
    for (const auto& c : results) {
      std::printf("[%2d] %s  %-26s %6.1f s  %s%s\n", c.id,
                  c.pass ? "PASS" : "FAIL", c.name.c_str(), c.seconds,
                  c.detail.c_str(),
                  c.stability_warning ? "  [stability warning]" : "");
      all = all && c.pass;
    }
    std::printf("reports: %s\n", opt.out_dir.string().c_str());
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance battery aborted: %s\n", e.what());
    return 1;
  }
}
