#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "goemax/config.hpp"

namespace goemax {

struct CheckResult {
  CheckResult() = default;
  CheckResult(std::string id_, std::string name_) : id(std::move(id_)), name(std::move(name_)) {}

  std::string id;
  std::string name;
  bool pass = false;
  bool informational = false;  // reported, never counted as a failure
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationOptions {
  bool quick = false;  // fewer draws, tolerances widened x3
  double tolerance_scale() const { return quick ? 3.0 : 1.0; }
};

std::vector<CheckResult> check_channel(const ExperimentConfig& cfg, const ValidationOptions& opt);
std::vector<CheckResult> check_delivery_and_error(const ExperimentConfig& cfg, const ValidationOptions& opt);
std::vector<CheckResult> check_generation_rates(const ExperimentConfig& cfg, const ValidationOptions& opt);
std::vector<CheckResult> check_threshold_identity(const ExperimentConfig& cfg, const ValidationOptions& opt);
std::vector<CheckResult> check_optimizer_grid(const ExperimentConfig& cfg, const ValidationOptions& opt);
std::vector<CheckResult> check_self_decision(const ExperimentConfig& cfg, const ValidationOptions& opt);
std::vector<CheckResult> check_large_states(const ExperimentConfig& cfg, const ValidationOptions& opt);
std::vector<CheckResult> check_figure_trends(const ExperimentConfig& cfg, const ValidationOptions& opt);

std::vector<CheckResult> run_validation(const ExperimentConfig& cfg, const ValidationOptions& opt);

bool all_passed(const std::vector<CheckResult>& results);
void print_results(std::ostream& out, const std::vector<CheckResult>& results);
std::string results_json(const std::vector<CheckResult>& results, const std::string& provenance);

}  // namespace goemax
