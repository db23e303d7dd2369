// One line per acceptance criterion; sub-check lines follow, indented.
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "goemax/validation.hpp"

using namespace goemax;

int main(int argc, char** argv) {
  ValidationOptions opt;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--quick") opt.quick = true;
  const ExperimentConfig cfg = default_config();

  const std::map<std::string, std::string> titles{
      {"AC1", "channel oracle equivalence"},   {"AC2", "delivery failure and steady-state error"},
      {"AC3", "generation rates"},             {"AC4", "threshold identity"},
      {"AC5", "optimizer vs grid oracle"},     {"AC6", "self-decision accuracy"},
      {"AC7", "large state spaces"},           {"AC8", "figure trends and determinism"}};
  using Check = std::vector<CheckResult> (*)(const ExperimentConfig&, const ValidationOptions&);
  const std::pair<const char*, Check> criteria[] = {
      {"AC1", check_channel},          {"AC2", check_delivery_and_error}, {"AC3", check_generation_rates},
      {"AC4", check_threshold_identity}, {"AC5", check_optimizer_grid},  {"AC6", check_self_decision},
      {"AC7", check_large_states},     {"AC8", check_figure_trends}};

  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto results = fn(cfg, opt);
    const bool pass = all_passed(results);
    double seconds = 0.0;
    for (const auto& r : results) seconds += r.seconds;
    std::printf("%s %s  %s (%.1fs)\n", id, pass ? "PASS" : "FAIL", titles.at(id).c_str(), seconds);
    for (const auto& r : results) {
      std::printf("    ");
      std::fflush(stdout);
      print_results(std::cout, {r});
    }
    std::cout.flush();
    failed += !pass;
  }
  std::printf("%d of 8 criteria failed\n", failed);
  return failed ? 1 : 0;
}
