#include "doctest.h"
#include "helpers.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "goemax/config.hpp"

using namespace goemax;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("empty document yields the defaults") {
    const ExperimentConfig c = parse_config("{}");
    CHECK(c.geometry.num_isas == 10);
    CHECK(c.geometry.num_nmas == 4);
    CHECK(c.geometry.num_attributes == 10);
    CHECK(c.attributes.size() == 10);
    CHECK(c.attributes[3].states == 10);
    CHECK(c.attributes[3].stay_prob == 0.2);
    CHECK(c.query.size() == 10);
    CHECK(c.euu_min == 0.1);
    CHECK(c.schemes.size() == 3);
    CHECK(c.optimizer.tying == AlphaTying::kTied);
    CHECK(c.threshold_grid.size() == 21);
    CHECK(c.hash.size() == 16);
  }

  TEST_CASE("units are converted once at load") {
    const ExperimentConfig c =
        parse_config(R"({"channel": {"noise_dbm": -90, "gamma_th_db": 3}, "functions": {"power_scale_dbm": 30}})");
    CHECK(c.budget.noise_w == doctest::Approx(1e-12));
    CHECK(c.budget.snr_threshold == doctest::Approx(1.99526).epsilon(1e-5));
    CHECK(c.functions.power_scale_w == doctest::Approx(1.0));
  }

  TEST_CASE("diagnostics name the offending field") {
    CHECK(field_of(R"({"euu_min": -0.1})") == "euu_min");
    CHECK(field_of(R"({"geometry": {"num_isas": 0}})") == "geometry.num_isas");
    CHECK(field_of(R"({"geometry": {"bogus": 1}})") == "geometry.bogus");
    CHECK(field_of(R"({"surprise": true})") == "surprise");
    CHECK(field_of(R"({"schemes": ["uniform", "psychic"]})") == "schemes");
    CHECK(field_of(R"({"quorum": 2})") == "quorum");
    CHECK(field_of(R"({"query": {"quorum": 9}})").rfind("query", 0) == 0);
    CHECK(field_of(R"({"seed": "one"})") == "seed");
    CHECK(field_of(R"({"attributes": {"per_attribute": [{"states": 5, "x": 1}]}})") ==
          "attributes.per_attribute[0].x");
    CHECK(field_of(R"({"mode": "fancy"})") == "mode");
    CHECK(field_of(R"({"optimizer": {"tying": "loose"}})") == "optimizer.tying");
  }

  TEST_CASE("syntax errors carry a line number") {
    try {
      parse_config("{\n  \"seed\": 3,\n  oops\n}");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  TEST_CASE("hash depends on content, not on key order or spacing") {
    const auto a = parse_config(R"({"seed": 4, "euu_min": 0.2})");
    const auto b = parse_config("{ \"euu_min\": 0.2,\n \"seed\": 4 }");
    const auto c = parse_config(R"({"seed": 5, "euu_min": 0.2})");
    CHECK(a.hash == b.hash);
    CHECK(a.hash != c.hash);
    CHECK(default_config().hash == parse_config("{}").hash);
    CHECK(provenance_line(a, 4) == "config=" + a.hash + " seed=4");
  }

  TEST_CASE("per-attribute chains and options") {
    const auto c = parse_config(R"({
      "geometry": {"num_attributes": 2},
      "attributes": {"per_attribute": [{"states": 4}, {"states": 50, "stay_prob": 0.5}]},
      "optimizer": {"tying": "per-attribute"},
      "mode": "as-printed",
      "local": {"surrogate": "exact", "draws": 50},
      "sweeps": {"sizes": [1, 2]}
    })");
    CHECK(c.attributes[0].states == 4);
    CHECK(c.attributes[1].stay_prob == 0.5);
    CHECK(c.optimizer.tying == AlphaTying::kPerAttribute);
    CHECK(c.mode == AnalysisMode::kAsPrinted);
    CHECK(c.local_surrogate == SuccessSurrogate::kExact);
    CHECK(c.local_draws == 50);
  }

  TEST_CASE("shipped default configuration spells out the defaults") {
    std::ifstream in(std::string(GOEMAX_CONFIGS) + "/default.json");
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    const ExperimentConfig p = parse_config(ss.str()), d = default_config();
    const ProblemInstance a = build_instance(p, Scheme::kSemanticsAware, 1), b = build_instance(d, Scheme::kSemanticsAware, 1);
    CHECK(a.topology.distance == b.topology.distance);
    CHECK(a.topology.observers == b.topology.observers);
    CHECK(p.budget.noise_w == doctest::Approx(d.budget.noise_w));
    CHECK(p.budget.snr_threshold == doctest::Approx(d.budget.snr_threshold));
    CHECK(p.functions.power_scale_w == doctest::Approx(d.functions.power_scale_w));
    CHECK(p.quorum == d.quorum);
    CHECK(p.threshold_grid == d.threshold_grid);
    CHECK(p.state_grid == d.state_grid);
    CHECK(p.intervals == d.intervals);
    CHECK(p.seeds == d.seeds);
  }

  TEST_CASE("instances are reproducible per seed") {
    const ExperimentConfig c = default_config();
    const ProblemInstance a = build_instance(c, Scheme::kUniform, 3), b = build_instance(c, Scheme::kChangeAware, 3);
    const ProblemInstance d = build_instance(c, Scheme::kUniform, 4);
    CHECK(a.topology.distance == b.topology.distance);
    CHECK(a.topology.observers == b.topology.observers);
    CHECK(a.topology.distance != d.topology.distance);
    CHECK(a.values.rows() == 10);
    CHECK(a.values(0, 0) == 0.5);
  }
}
