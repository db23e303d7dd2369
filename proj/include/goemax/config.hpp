#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "goemax/effectiveness.hpp"
#include "goemax/local_estimation.hpp"
#include "goemax/optimizer.hpp"

namespace goemax {

struct AttributeSpec {
  int states = 10;
  double stay_prob = 0.2;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  GeometryConfig geometry;
  std::vector<AttributeSpec> attributes;  // size N after load
  std::vector<int> query;                 // queried attribute order
  int quorum = 3;
  LinkBudget budget;
  GoEFunctions functions;
  MetaValueModel meta;
  double euu_min = 0.1;
  std::vector<Scheme> schemes{Scheme::kUniform, Scheme::kChangeAware, Scheme::kSemanticsAware};
  AnalysisMode mode = AnalysisMode::kNormalized;
  int enumeration_cap = 12;
  OptimizerConfig optimizer;
  int local_draws = 1000;
  SuccessSurrogate local_surrogate = SuccessSurrogate::kChernoffBound;
  int intervals = 500;
  int seeds = 20;
  std::vector<double> threshold_grid;
  std::vector<int> state_grid{4, 10, 20, 50};
  std::vector<int> size_grid{5, 10};
  std::string output_dir = "out";
  std::string hash;  // of the canonical JSON text

  void validate() const;
};

// Parses and validates a JSON document; every physical field carries its
// unit in the key (noise_dbm, gamma_th_db, height_m, ...). Errors are
// ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig default_config();

// Problem instance for the given seed: topology sampled from the geometry,
// analytic meta values at the law's mean.
ProblemInstance build_instance(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t seed);

// "config=<hash> seed=<seed>" for output headers.
std::string provenance_line(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace goemax
