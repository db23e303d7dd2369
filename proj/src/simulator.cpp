#include "goemax/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "goemax/channel.hpp"
#include "goemax/error.hpp"
#include "goemax/optimizer.hpp"
#include "goemax/parallel.hpp"

namespace goemax {

namespace {

// Running mean/variance (Welford).
struct Moments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double half_width() const { return n > 1 ? 1.96 * std::sqrt(m2 / (n - 1) / n) : 0.0; }
  Estimate estimate() const { return {mean, half_width()}; }
};

std::uint64_t replication_seed(std::uint64_t root, int r) {
  return splitmix64(root ^ splitmix64(static_cast<std::uint64_t>(r) + 1));
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

Eigen::MatrixXd activation_from_alpha(const EffectivenessModel& model, const Eigen::MatrixXd& alpha) {
  const FeatureReport rep = model.evaluate(alpha);
  Eigen::MatrixXd act = Eigen::MatrixXd::Zero(alpha.rows(), alpha.cols());
  for (const auto& a : rep.attributes)
    for (int k : model.instance().topology.observers[a.attribute])
      act(k, a.attribute) = a.generation > 0.0 ? std::min(1.0, alpha(k, a.attribute) / a.generation) : 0.0;
  return act;
}

ThresholdPolicy thresholds_from_alpha(const EffectivenessModel& model, const Eigen::MatrixXd& alpha) {
  const FeatureReport rep = model.evaluate(alpha);
  ThresholdPolicy p{Eigen::MatrixXd::Ones(alpha.rows(), alpha.cols())};
  for (const auto& a : rep.attributes)
    for (int k : model.instance().topology.observers[a.attribute])
      p.threshold(k, a.attribute) = threshold_from_alpha(alpha(k, a.attribute), a.generation, model.instance().meta);
  return p;
}

RunReport run_simulation(const ProblemInstance& inst, const SimulationConfig& cfg) {
  if (cfg.intervals < 1) throw ConfigError("intervals", "must be >= 1");
  const Topology& topo = inst.topology;
  const int num_k = topo.num_isas, num_m = topo.num_nmas;
  const int slots = inst.schedule.size();
  if (cfg.policy == PolicyMode::kFixedAlpha &&
      (cfg.activation.rows() != num_k || cfg.activation.cols() != topo.num_attributes))
    throw ConfigError("activation", "must be K x N");
  if (cfg.policy == PolicyMode::kThreshold &&
      (cfg.thresholds.threshold.rows() != num_k || cfg.thresholds.threshold.cols() != topo.num_attributes))
    throw ConfigError("thresholds", "must be K x N");

  const auto& fn = inst.functions;
  const auto& budget = inst.budget;
  const double analytic_power = inst.analytic_power_w();
  std::vector<AttributeChain> chains = inst.chains;
  std::vector<int> estimate(topo.num_attributes, 0);  // NMA-side state, zero-order hold

  RunReport rep;
  rep.scheme = inst.scheme;
  rep.intervals = cfg.intervals;
  rep.attributes.resize(slots);
  for (int j = 0; j < slots; ++j) rep.attributes[j].attribute = inst.schedule.attributes[j];

  // Path-loss gains d^-a per (k, m) are fixed for the run.
  Eigen::MatrixXd gain(num_k, num_m);
  for (int k = 0; k < num_k; ++k)
    for (int m = 0; m < num_m; ++m) gain(k, m) = std::pow(topo.distance(k, m), -budget.path_loss_exponent);

  Moments ede_m, erc_m, euu_m;
  std::exponential_distribution<double> fading(1.0);
  std::vector<IsaSlot> isas;
  std::vector<double> signal(num_m), interference(num_m);

  for (int t = 0; t < cfg.intervals; ++t) {
    double f1 = 0.0, f2 = 0.0, error_sum = 0.0;
    bool all_delivered = true;
    for (int j = 0; j < slots; ++j) {
      const int n = inst.schedule.attributes[j];
      AttributeChain& chain = chains[n];
      const auto tt = static_cast<std::uint64_t>(t), jj = static_cast<std::uint64_t>(j);

      Rng chain_rng = substream(cfg.seed, {1, tt, jj});
      const int previous = chain.state;
      const int truth = dtmc_step(chain, chain_rng);

      bool triggered = true;
      if (inst.scheme == Scheme::kChangeAware) triggered = truth != previous;
      if (inst.scheme == Scheme::kSemanticsAware) triggered = truth != estimate[n];

      isas.clear();
      for (int k : topo.observers[n]) {
        Rng r = substream(cfg.seed, {2, tt, jj, static_cast<std::uint64_t>(k)});
        const double u_obs = uniform01(r), u_wrong = uniform01(r), u_value = uniform01(r), u_act = uniform01(r);
        IsaSlot s;
        s.isa = k;
        s.observed = truth;
        if (u_obs >= topo.accuracy(k, n) && chain.states > 1) {
          const int w = std::min(chain.states - 2, static_cast<int>(u_wrong * (chain.states - 1)));
          s.observed = w >= truth ? w + 1 : w;
        }
        s.generated = triggered;
        s.value = meta_value_inverse_cdf(inst.meta, u_value);
        if (cfg.policy == PolicyMode::kFixedAlpha) s.spoke = s.generated && u_act < cfg.activation(k, n);
        else s.spoke = decide_speak(cfg.thresholds, k, n, s.generated, s.value);
        s.tx_power_w = cfg.power == PowerMode::kAnalytic ? analytic_power : fn.tx_power(s.value);
        if (s.spoke) {
          f1 += s.value;
          f2 += fn.resource_term(1.0, s.value);
        }
        isas.push_back(s);
      }

      std::fill(signal.begin(), signal.end(), 0.0);
      std::fill(interference.begin(), interference.end(), 0.0);
      for (int m = 0; m < num_m; ++m) {
        Rng fr = substream(cfg.seed, {3, tt, jj, static_cast<std::uint64_t>(m)});
        for (const IsaSlot& s : isas) {
          const double rx = s.tx_power_w * gain(s.isa, m) * fading(fr);
          if (!s.spoke) continue;
          (s.observed == truth ? signal[m] : interference[m]) += rx;
        }
      }
      int decoded = 0;
      SlotTrace trace;
      const bool keep = cfg.record_trace && static_cast<int>(rep.trace.size()) < cfg.trace_limit;
      for (int m = 0; m < num_m; ++m) {
        const double sinr = signal[m] > 0.0 ? signal[m] / (interference[m] + budget.noise_w) : 0.0;
        const bool ok = signal[m] > 0.0 && (cfg.ideal_channel || sinr > budget.snr_threshold);
        decoded += ok;
        if (keep) {
          trace.sinr.push_back(sinr);
          trace.decoded.push_back(ok);
        }
      }
      const bool quorum = decoded >= inst.schedule.quorum;
      if (quorum) estimate[n] = truth;
      const bool failure = triggered && !quorum;
      const bool error = estimate[n] != truth;

      AttributeStats& st = rep.attributes[j];
      ++st.slots;
      st.triggered += triggered;
      st.failures += failure;
      st.errors += error;
      for (const IsaSlot& s : isas) {
        ++st.observer_slots;
        st.generated += s.generated;
        st.spoke += s.spoke;
      }
      error_sum += error;
      all_delivered = all_delivered && !failure;

      if (keep) {
        trace.interval = t;
        trace.slot = j;
        trace.attribute = n;
        trace.true_state = truth;
        trace.isas = isas;
        trace.quorum = quorum;
        trace.reconstructed = estimate[n];
        rep.trace.push_back(std::move(trace));
      }
    }
    ede_m.add(f1 * error_sum);
    erc_m.add(all_delivered ? f2 : 0.0);
    euu_m.add(all_delivered ? f1 : 0.0);
  }

  rep.ede = ede_m.estimate();
  rep.erc = erc_m.estimate();
  rep.euu = euu_m.estimate();
  rep.objective.mean = fn.w1 * fn.g(1, rep.ede.mean) + fn.w2() * fn.g(2, rep.erc.mean);
  rep.objective.half_width = fn.w1 * fn.g_prime(1, rep.ede.mean) * rep.ede.half_width +
                             fn.w2() * fn.g_prime(2, rep.erc.mean) * rep.erc.half_width;
  rep.constraint = fn.g(3, rep.euu.mean);
  long obs = 0, gen = 0, spoke = 0;
  for (const auto& a : rep.attributes) {
    obs += a.observer_slots;
    gen += a.generated;
    spoke += a.spoke;
  }
  rep.generation_rate = obs ? double(gen) / obs : 0.0;
  rep.speak_rate = obs ? double(spoke) / obs : 0.0;
  return rep;
}

std::vector<ThresholdRow> sweep_threshold(const ProblemInstance& inst, const std::vector<Scheme>& schemes,
                                          const std::vector<double>& grid, int intervals, int replications,
                                          std::uint64_t root_seed) {
  if (replications < 1) throw ConfigError("seeds", "at least one replication is required");
  const int points = static_cast<int>(schemes.size() * grid.size());
  std::vector<RunReport> runs(static_cast<std::size_t>(points) * replications);
  parallel_for(static_cast<int>(runs.size()), [&](int idx) {
    const int point = idx / replications, r = idx % replications;
    ProblemInstance local = inst;
    local.scheme = schemes[point / grid.size()];
    SimulationConfig cfg;
    cfg.intervals = intervals;
    cfg.seed = replication_seed(root_seed, r);
    cfg.policy = PolicyMode::kThreshold;
    cfg.thresholds.threshold =
        Eigen::MatrixXd::Constant(inst.topology.num_isas, inst.topology.num_attributes, grid[point % grid.size()]);
    runs[idx] = run_simulation(local, cfg);
  });

  std::vector<ThresholdRow> rows;
  for (int point = 0; point < points; ++point) {
    Moments g, e, a;
    for (int r = 0; r < replications; ++r) {
      const RunReport& run = runs[static_cast<std::size_t>(point) * replications + r];
      g.add(run.objective.mean);
      e.add(run.euu.mean);
      a.add(run.speak_rate);
    }
    ThresholdRow row;
    row.scheme = schemes[point / grid.size()];
    row.v_th = grid[point % grid.size()];
    row.objective = g.estimate();
    row.euu = e.estimate();
    row.alpha_eff = a.mean;
    row.constraint = inst.functions.g(3, row.euu.mean);
    rows.push_back(row);
  }
  return rows;
}

int count_constraint_roots(const std::vector<ThresholdRow>& rows, Scheme scheme, double euu_min) {
  int roots = 0, last = 0;
  for (const auto& r : rows) {
    if (r.scheme != scheme) continue;
    const double gap = r.constraint - euu_min;
    const int sign = gap > 0.0 ? 1 : (gap < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last != 0 && sign != last) ++roots;
    last = sign;
  }
  return roots;
}

std::optional<std::pair<double, double>> tied_feasible_minimum(const EffectivenessModel& model) {
  const AlphaLayout layout(model.instance(), AlphaTying::kTied);
  const double euu_min = model.instance().euu_min;
  auto at = [&](double t) { return model.evaluate(layout.expand(Eigen::VectorXd::Constant(1, t))); };
  double best_t = -1.0, best = std::numeric_limits<double>::infinity();
  auto scan = [&](double lo, double hi, int steps) {
    for (int i = 0; i <= steps; ++i) {
      const double t = std::clamp(lo + (hi - lo) * i / steps, 0.0, 1.0);
      const FeatureReport r = at(t);
      if (r.constraint >= euu_min && r.objective < best) {
        best = r.objective;
        best_t = t;
      }
    }
  };
  scan(0.0, 1.0, 100);
  if (best_t < 0.0) return std::nullopt;
  const double c = best_t;
  scan(c - 0.01, c + 0.01, 200);
  return std::make_pair(best_t, best);
}

std::vector<StateRow> sweep_states(const ProblemInstance& base, const std::vector<int>& states,
                                   const std::vector<int>& sizes) {
  std::vector<StateRow> rows(states.size() * sizes.size());
  parallel_for(static_cast<int>(rows.size()), [&](int idx) {
    StateRow& row = rows[idx];
    row.states = states[idx / sizes.size()];
    row.attributes = sizes[idx % sizes.size()];
    if (row.attributes == 0) {
      if (base.euu_min <= 0.0) row.objective = 0.0;
      return;
    }
    if (row.attributes > base.topology.num_attributes) throw ConfigError("grids.attributes", "exceeds N");
    ProblemInstance inst = base;
    for (int n = 0; n < base.topology.num_attributes; ++n)
      inst.chains[n] = AttributeChain::symmetric(n, row.states, base.chains[n].stay_prob);
    inst.schedule.attributes.resize(row.attributes);
    for (int j = 0; j < row.attributes; ++j) inst.schedule.attributes[j] = j;
    Eigen::MatrixXd values(base.topology.num_isas, row.attributes);
    for (int j = 0; j < row.attributes; ++j)
      if (j < base.values.cols())
        values.col(j) = base.values.col(j);
      else
        values.col(j).setConstant(base.meta.mean());
    inst.values = values;
    try {
      const EffectivenessModel model(inst);
      if (auto m = tied_feasible_minimum(model)) {
        row.alpha = m->first;
        row.objective = m->second;
      }
    } catch (const Error&) {
      row.objective.reset();  // marked by an empty cell
    }
  });
  return rows;
}

void write_threshold_csv(std::ostream& out, const std::vector<ThresholdRow>& rows, const std::string& header_comment) {
  out << "# " << header_comment << "\n";
  out << "scheme,v_th,G_mean,G_ci,EUU_mean,EUU_ci,alpha_eff\n";
  for (const auto& r : rows)
    out << scheme_name(r.scheme) << ',' << fmt(r.v_th) << ',' << fmt(r.objective.mean) << ','
        << fmt(r.objective.half_width) << ',' << fmt(r.euu.mean) << ',' << fmt(r.euu.half_width) << ','
        << fmt(r.alpha_eff) << "\n";
}

void write_states_csv(std::ostream& out, const std::vector<StateRow>& rows, const std::string& header_comment) {
  out << "# " << header_comment << "\n";
  out << "I_n,A_size,G_min_feasible,alpha\n";
  for (const auto& r : rows)
    out << r.states << ',' << r.attributes << ',' << (r.objective ? fmt(*r.objective) : "") << ','
        << (r.objective ? fmt(r.alpha) : "") << "\n";
}

}  // namespace goemax
