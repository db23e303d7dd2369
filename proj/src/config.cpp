#include "goemax/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "goemax/error.hpp"

namespace goemax {

using nlohmann::json;

namespace {

// Reads keys of one JSON object, rejecting anything not consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(field(k), "unknown field");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <class T>
  void get(const std::string& k, T& out) {
    seen_.insert(k);
    if (!j_.contains(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(k), std::string("wrong type: ") + e.what());
    }
  }
  const json* child(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) ? &j_.at(k) : nullptr;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Scheme scheme_from(const std::string& s, const std::string& field) {
  if (auto v = parse_scheme(s)) return *v;
  throw ConfigError(field, "unknown scheme '" + s + "' (uniform, change, semantics)");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_text(const std::string& canonical) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& g = geometry;
  if (g.num_isas < 1) throw ConfigError("geometry.num_isas", "must be >= 1");
  if (g.num_nmas < 1) throw ConfigError("geometry.num_nmas", "must be >= 1");
  if (g.num_attributes < 1) throw ConfigError("geometry.num_attributes", "must be >= 1");
  if (!(g.height_m >= 0.0)) throw ConfigError("geometry.height_m", "must be >= 0");
  if (!(g.horizontal_sd_m > 0.0)) throw ConfigError("geometry.horizontal_sd_m", "must be > 0");
  if (!(g.jitter_m > 0.0)) throw ConfigError("geometry.jitter_m", "must be > 0");
  if (!(g.observe_prob > 0.0 && g.observe_prob <= 1.0)) throw ConfigError("geometry.observe_prob", "must lie in (0, 1]");
  if (!(g.accuracy >= 0.0 && g.accuracy <= 1.0)) throw ConfigError("attributes.accuracy", "must lie in [0, 1]");
  if (static_cast<int>(attributes.size()) != g.num_attributes)
    throw ConfigError("attributes.per_attribute", "one entry per attribute is required");
  for (std::size_t n = 0; n < attributes.size(); ++n) {
    const std::string f = "attributes[" + std::to_string(n) + "]";
    if (attributes[n].states < 2) throw ConfigError(f + ".states", "must be >= 2");
    if (!(attributes[n].stay_prob >= 0.0 && attributes[n].stay_prob <= 1.0))
      throw ConfigError(f + ".stay_prob", "must lie in [0, 1]");
  }
  if (query.empty()) throw ConfigError("query.attributes", "must not be empty");
  std::set<int> uniq;
  for (int n : query) {
    if (n < 0 || n >= g.num_attributes) throw ConfigError("query.attributes", "index out of range");
    if (!uniq.insert(n).second) throw ConfigError("query.attributes", "attributes must not repeat");
  }
  if (quorum < 1 || quorum > g.num_nmas) throw ConfigError("query.quorum", "must lie in [1, M]");
  if (!(budget.path_loss_exponent > 0.0)) throw ConfigError("channel.path_loss_exponent", "must be > 0");
  if (!(euu_min > 0.0)) throw ConfigError("euu_min", "must be > 0");
  if (schemes.empty()) throw ConfigError("schemes", "must not be empty");
  if (enumeration_cap < 1 || enumeration_cap > 16) throw ConfigError("enumeration_cap", "must lie in [1, 16]");
  if (local_draws < 1) throw ConfigError("local.draws", "must be >= 1");
  if (intervals < 1) throw ConfigError("simulation.intervals", "must be >= 1");
  if (seeds < 1) throw ConfigError("simulation.seeds", "must be >= 1");
  for (double v : threshold_grid)
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("sweeps.thresholds", "values must lie in [0, 1]");
  for (int s : state_grid)
    if (s < 2) throw ConfigError("sweeps.states", "values must be >= 2");
  for (int s : size_grid)
    if (s < 0 || s > g.num_attributes) throw ConfigError("sweeps.sizes", "values must lie in [0, N]");
  functions.validate();
  optimizer.validate();
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.attributes.assign(c.geometry.num_attributes, AttributeSpec{});
  for (int n = 0; n < c.geometry.num_attributes; ++n) c.query.push_back(n);
  c.budget.noise_w = dbm_to_watts(-120.0);
  c.budget.snr_threshold = db_to_linear(10.0);
  c.optimizer.tying = AlphaTying::kTied;
  for (int i = 0; i <= 20; ++i) c.threshold_grid.push_back(i * 0.05);
  c.hash = hash_text(json::object().dump());
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
    throw ConfigError("<json>", "parse error on line " + std::to_string(line) + ": " + e.what());
  }
  ExperimentConfig c = default_config();
  {
    Reader r(root, "");
    r.get("seed", c.seed);
    if (const json* g = r.child("geometry")) {
      Reader gr(*g, "geometry");
      gr.get("num_isas", c.geometry.num_isas);
      gr.get("num_nmas", c.geometry.num_nmas);
      gr.get("num_attributes", c.geometry.num_attributes);
      gr.get("height_m", c.geometry.height_m);
      gr.get("horizontal_sd_m", c.geometry.horizontal_sd_m);
      gr.get("jitter_m", c.geometry.jitter_m);
      gr.get("observe_prob", c.geometry.observe_prob);
      gr.finish();
    }
    AttributeSpec common;
    std::vector<AttributeSpec> per;
    if (const json* a = r.child("attributes")) {
      Reader ar(*a, "attributes");
      ar.get("states", common.states);
      ar.get("stay_prob", common.stay_prob);
      ar.get("accuracy", c.geometry.accuracy);
      if (const json* list = ar.child("per_attribute")) {
        if (!list->is_array()) throw ConfigError("attributes.per_attribute", "expected an array");
        for (std::size_t i = 0; i < list->size(); ++i) {
          AttributeSpec s = common;
          Reader sr((*list)[i], "attributes.per_attribute[" + std::to_string(i) + "]");
          sr.get("states", s.states);
          sr.get("stay_prob", s.stay_prob);
          per.push_back(s);
          sr.finish();
        }
      }
      ar.finish();
    }
    c.attributes = per.empty() ? std::vector<AttributeSpec>(std::max(0, c.geometry.num_attributes), common) : per;
    c.query.clear();
    for (int n = 0; n < c.geometry.num_attributes; ++n) c.query.push_back(n);
    if (const json* q = r.child("query")) {
      Reader qr(*q, "query");
      qr.get("attributes", c.query);
      qr.get("quorum", c.quorum);
      qr.finish();
    }
    if (const json* ch = r.child("channel")) {
      Reader cr(*ch, "channel");
      double noise_dbm = -120.0, gamma_db = 10.0;
      cr.get("path_loss_exponent", c.budget.path_loss_exponent);
      cr.get("noise_dbm", noise_dbm);
      cr.get("gamma_th_db", gamma_db);
      c.budget.noise_w = dbm_to_watts(noise_dbm);
      c.budget.snr_threshold = db_to_linear(gamma_db);
      cr.finish();
    }
    if (const json* f = r.child("functions")) {
      Reader fr(*f, "functions");
      std::vector<double> kappa{c.functions.kappa[0], c.functions.kappa[1], c.functions.kappa[2]};
      fr.get("kappa", kappa);
      if (kappa.size() != 3) throw ConfigError("functions.kappa", "expected three rates");
      for (int i = 0; i < 3; ++i) c.functions.kappa[i] = kappa[i];
      fr.get("h_scale", c.functions.h_scale);
      double p0_dbm = 20.0;
      fr.get("power_scale_dbm", p0_dbm);
      c.functions.power_scale_w = dbm_to_watts(p0_dbm);
      fr.get("w1", c.functions.w1);
      fr.finish();
    }
    if (const json* m = r.child("meta_value")) {
      Reader mr(*m, "meta_value");
      mr.get("shape_a", c.meta.shape_a);
      mr.get("shape_b", c.meta.shape_b);
      if (!(c.meta.shape_a > 0.0)) throw ConfigError("meta_value.shape_a", "must be > 0");
      if (!(c.meta.shape_b > 0.0)) throw ConfigError("meta_value.shape_b", "must be > 0");
      mr.finish();
    }
    r.get("euu_min", c.euu_min);
    std::vector<std::string> names;
    r.get("schemes", names);
    if (!names.empty()) c.schemes.clear();
    for (const auto& s : names) c.schemes.push_back(scheme_from(s, "schemes"));
    std::string mode = "normalized";
    r.get("mode", mode);
    if (mode == "normalized") c.mode = AnalysisMode::kNormalized;
    else if (mode == "as-printed") c.mode = AnalysisMode::kAsPrinted;
    else throw ConfigError("mode", "expected 'normalized' or 'as-printed'");
    r.get("enumeration_cap", c.enumeration_cap);
    if (const json* o = r.child("optimizer")) {
      Reader orr(*o, "optimizer");
      std::string tying = "tied";
      orr.get("tying", tying);
      if (tying == "tied") c.optimizer.tying = AlphaTying::kTied;
      else if (tying == "per-attribute") c.optimizer.tying = AlphaTying::kPerAttribute;
      else if (tying == "full") c.optimizer.tying = AlphaTying::kFull;
      else throw ConfigError("optimizer.tying", "expected 'tied', 'per-attribute' or 'full'");
      orr.get("alpha_tol", c.optimizer.alpha_tol);
      orr.get("weight_tol", c.optimizer.weight_tol);
      orr.get("max_inner", c.optimizer.max_inner);
      orr.get("max_outer", c.optimizer.max_outer);
      orr.get("eta_first", c.optimizer.eta_first);
      orr.get("eta_growth", c.optimizer.eta_growth);
      orr.get("fd_step", c.optimizer.fd_step);
      orr.get("constraint_tol", c.optimizer.constraint_tol);
      orr.get("calibrate_resource_scale", c.optimizer.calibrate_resource_scale);
      orr.finish();
    }
    if (const json* l = r.child("local")) {
      Reader lr(*l, "local");
      lr.get("draws", c.local_draws);
      std::string s = "chernoff";
      lr.get("surrogate", s);
      if (s == "chernoff") c.local_surrogate = SuccessSurrogate::kChernoffBound;
      else if (s == "exact") c.local_surrogate = SuccessSurrogate::kExact;
      else throw ConfigError("local.surrogate", "expected 'chernoff' or 'exact'");
      lr.finish();
    }
    if (const json* s = r.child("simulation")) {
      Reader sr(*s, "simulation");
      sr.get("intervals", c.intervals);
      sr.get("seeds", c.seeds);
      sr.finish();
    }
    if (const json* s = r.child("sweeps")) {
      Reader sr(*s, "sweeps");
      sr.get("thresholds", c.threshold_grid);
      sr.get("states", c.state_grid);
      sr.get("sizes", c.size_grid);
      sr.finish();
    }
    r.get("output_dir", c.output_dir);
    r.finish();
  }
  c.validate();
  c.hash = hash_text(root.dump());
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ProblemInstance build_instance(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t seed) {
  ProblemInstance inst;
  Rng rng = substream(seed, {0});
  inst.topology = sample_topology(cfg.geometry, rng);
  for (int n = 0; n < cfg.geometry.num_attributes; ++n)
    inst.chains.push_back(AttributeChain::symmetric(n, cfg.attributes[n].states, cfg.attributes[n].stay_prob));
  inst.schedule.attributes = cfg.query;
  inst.schedule.quorum = cfg.quorum;
  inst.budget = cfg.budget;
  inst.functions = cfg.functions;
  inst.meta = cfg.meta;
  inst.scheme = scheme;
  inst.mode = cfg.mode;
  inst.euu_min = cfg.euu_min;
  inst.enumeration_cap = cfg.enumeration_cap;
  inst.values = Eigen::MatrixXd::Constant(cfg.geometry.num_isas, static_cast<int>(cfg.query.size()), cfg.meta.mean());
  inst.validate();
  return inst;
}

std::string provenance_line(const ExperimentConfig& cfg, std::uint64_t seed) {
  return "config=" + cfg.hash + " seed=" + std::to_string(seed);
}

}  // namespace goemax
