#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "goemax/config.hpp"
#include "goemax/simulator.hpp"
#include "goemax/validation.hpp"

using namespace goemax;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2, kNotConverged = 3, kValidation = 4 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool tied = false;
  std::string scheme;
  std::string mode;
  bool quick = false;
  std::string out;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? default_config() : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.tied) cfg.optimizer.tying = AlphaTying::kTied;
  if (!o.scheme.empty()) {
    const std::string name = o.scheme == "change" ? "change-aware" : o.scheme == "semantics" ? "semantics-aware" : o.scheme;
    const auto s = parse_scheme(name);
    if (!s) throw ConfigError("--scheme", "unknown scheme '" + o.scheme + "'");
    cfg.schemes = {*s};
  }
  if (o.mode == "as-printed") cfg.mode = AnalysisMode::kAsPrinted;
  else if (o.mode == "normalized") cfg.mode = AnalysisMode::kNormalized;
  else if (!o.mode.empty()) throw ConfigError("--mode", "expected as-printed or normalized");
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

fs::path output_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return fs::path(cfg.output_dir) / name;
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::ordered_json solution_json(const Solution& s, Scheme scheme, const std::string& provenance, bool ok) {
  const auto& f = s.features;
  nlohmann::ordered_json attrs = nlohmann::ordered_json::array();
  for (const auto& a : f.attributes)
    attrs.push_back({{"attribute", a.attribute},
                     {"generation", a.generation},
                     {"failure", a.failure},
                     {"error", a.error}});
  return {{"provenance", provenance},
          {"scheme", std::string(scheme_name(scheme))},
          {"converged", ok},
          {"alpha", matrix_json(s.alpha_star)},
          {"w1", s.w1},
          {"w2", s.w2},
          {"eta", s.eta},
          {"h_scale", s.h_scale},
          {"constraint_active", s.constraint_active},
          {"printed_loop_converged", s.printed_loop_converged},
          {"residuals",
           {{"kkt", s.kkt_residual}, {"constraint_gap", s.constraint_gap}, {"eq14_relative", s.eq14_relative_error}}},
          {"iterations", {{"inner", s.inner_iterations}, {"outer", s.outer_iterations}}},
          {"convexity",
           {{"h4", s.convexity.h4},
            {"h5", s.convexity.h5},
            {"h6", s.convexity.h6},
            {"h4_slack", s.convexity.h4_slack},
            {"h5_slack", s.convexity.h5_slack},
            {"h6_slack", s.convexity.h6_slack},
            {"richardson_gap", s.convexity.richardson_gap}}},
          {"features",
           {{"ede", f.ede}, {"erc", f.erc}, {"euu", f.euu}, {"objective", f.objective}, {"constraint", f.constraint}}},
          {"attributes", attrs}};
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

int cmd_solve(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const std::string prov = provenance_line(cfg, cfg.seed);
  int code = kOk;
  for (Scheme s : cfg.schemes) {
    const ProblemInstance inst = build_instance(cfg, s, cfg.seed);
    const EffectivenessModel model(inst);
    Solution sol;
    bool ok = true;
    try {
      sol = solve_algorithm1(model, cfg.optimizer);
    } catch (const NotConverged& e) {
      std::cerr << scheme_name(s) << ": " << e.what() << '\n';
      sol = e.best();
      ok = false;
      code = kNotConverged;
    }
    const fs::path path = output_path(cfg, "solution_" + std::string(scheme_name(s)) + ".json");
    write_json(path, solution_json(sol, s, prov, ok));
    std::printf("%-16s alpha_max=%.4f w1=%.4f eta=%.4g gap=%.2e kkt=%.2e G=%.6g -> %s\n",
                std::string(scheme_name(s)).c_str(), sol.alpha_star.maxCoeff(), sol.w1, sol.eta, sol.constraint_gap,
                sol.kkt_residual, sol.features.objective, path.c_str());
  }
  return code;
}

int cmd_sweep(const Options& o, const std::string& which) {
  const ExperimentConfig cfg = load(o);
  const std::string prov = provenance_line(cfg, cfg.seed);
  const ProblemInstance inst = build_instance(cfg, cfg.schemes.front(), cfg.seed);
  if (which == "fig2") {
    const int intervals = o.quick ? std::min(cfg.intervals, 100) : cfg.intervals;
    const int reps = o.quick ? std::min(cfg.seeds, 4) : cfg.seeds;
    const auto rows = sweep_threshold(inst, cfg.schemes, cfg.threshold_grid, intervals, reps, cfg.seed);
    const fs::path path = output_path(cfg, "fig2.csv");
    std::ofstream out(path);
    write_threshold_csv(out, rows, prov + " euu_min=" + std::to_string(cfg.euu_min) +
                                       " intervals=" + std::to_string(intervals) + " seeds=" + std::to_string(reps));
    for (Scheme s : cfg.schemes)
      std::printf("%-16s EUU_min crossings: %d\n", std::string(scheme_name(s)).c_str(),
                  count_constraint_roots(rows, s, cfg.euu_min));
    std::printf("wrote %s\n", path.c_str());
  } else {
    const auto rows = sweep_states(inst, cfg.state_grid, cfg.size_grid);
    const fs::path path = output_path(cfg, "fig3.csv");
    std::ofstream out(path);
    write_states_csv(out, rows, prov + " scheme=" + std::string(scheme_name(inst.scheme)));
    int missing = 0;
    for (const auto& r : rows) missing += !r.objective;
    if (missing) std::fprintf(stderr, "%d rows without a feasible activation (empty cells)\n", missing);
    std::printf("wrote %s\n", path.c_str());
  }
  return kOk;
}

int cmd_validate(const Options& o) {
  const ExperimentConfig cfg = load(o);
  ValidationOptions vo;
  vo.quick = o.quick;
  const auto results = run_validation(cfg, vo);
  print_results(std::cout, results);
  const fs::path path = output_path(cfg, "validation.json");
  std::ofstream(path) << results_json(results, provenance_line(cfg, cfg.seed)) << '\n';
  const bool ok = all_passed(results);
  std::printf("%s; report %s\n", ok ? "all checks passed" : "some checks failed", path.c_str());
  return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goemax: goal-oriented multiple access analysis and simulation"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    c->add_option("--seed", seed, "root seed override");
    c->add_flag("--tied-alpha", o.tied, "one common activation for all ISAs and attributes");
    c->add_option("--scheme", o.scheme, "uniform | change | semantics")
        ->check(CLI::IsMember({"uniform", "change", "semantics", "change-aware", "semantics-aware"}));
    c->add_option("--mode", o.mode, "as-printed | normalized")->check(CLI::IsMember({"as-printed", "normalized"}));
    c->add_flag("--quick", o.quick, "reduced draw counts");
    c->add_option("--out", o.out, "output directory");
  };
  auto* solve = app.add_subcommand("solve", "run the activation optimizer and write solution JSON");
  auto* sweep = app.add_subcommand("sweep", "threshold (fig2) or state-count (fig3) sweep to CSV");
  auto* validate = app.add_subcommand("validate", "run the oracle checks");
  std::string which;
  sweep->add_option("which", which, "fig2 | fig3")->required()->check(CLI::IsMember({"fig2", "fig3"}));
  for (auto* c : {solve, sweep, validate}) add_common(c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }
  for (auto* c : {solve, sweep, validate})
    if (c->parsed() && c->count("--seed")) o.seed = seed;

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (sweep->parsed()) return cmd_sweep(o, which);
    return cmd_validate(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NotConverged& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
