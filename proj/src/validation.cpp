#include "goemax/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "goemax/simulator.hpp"

namespace goemax {
namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double horizontal(Rng& rng, double sd) { return std::abs(std::normal_distribution<double>(0.0, sd)(rng)); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Scheme random_scheme(Rng& rng) { return static_cast<Scheme>(uniform_int(rng, 0, 2)); }

// Independent simulation of the truth/estimate pair of one attribute.
double simulate_error_chain(const AttributeChain& chain, double failure, Scheme scheme, long steps, Rng& rng) {
  int truth = 0, estimate = 0;
  long errors = 0;
  for (long t = 0; t < steps; ++t) {
    const int prev = truth;
    if (uniform01(rng) >= chain.stay_prob) {
      const int hop = uniform_int(rng, 1, chain.states - 1);
      truth = (truth + hop) % chain.states;
    }
    bool gen = true;
    if (scheme == Scheme::kChangeAware) gen = truth != prev;
    if (scheme == Scheme::kSemanticsAware) gen = truth != estimate;
    if (gen && uniform01(rng) >= failure) estimate = truth;
    errors += truth != estimate;
  }
  return double(errors) / steps;
}

ProblemInstance small_instance(const ExperimentConfig& cfg, Rng& rng, int isas, int nmas, int attributes) {
  GeometryConfig g = cfg.geometry;
  g.num_isas = isas;
  g.num_nmas = nmas;
  g.num_attributes = attributes;
  ProblemInstance inst;
  inst.topology = sample_topology(g, rng);
  for (int n = 0; n < attributes; ++n)
    inst.chains.push_back(AttributeChain::symmetric(n, uniform_int(rng, 3, 10), uniform(rng, 0.2, 0.8)));
  inst.budget = cfg.budget;
  inst.functions = cfg.functions;
  inst.meta = cfg.meta;
  inst.mode = cfg.mode;
  inst.enumeration_cap = cfg.enumeration_cap;
  return inst;
}

CheckResult finish(CheckResult r, Clock::time_point t0) {
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

// Replication seeds shared by every policy compared in one experiment.
std::uint64_t replication_seed(std::uint64_t root, int r) { return splitmix64(root ^ splitmix64(r + 1)); }

struct Aggregate {
  double ede = 0, erc = 0, euu = 0, euu_hw = 0;
};

Aggregate simulate_policy(const ProblemInstance& inst, const ThresholdPolicy& policy, int intervals, int reps,
                          std::uint64_t root) {
  std::vector<double> euu(reps);
  Aggregate a;
  for (int r = 0; r < reps; ++r) {
    SimulationConfig sc;
    sc.intervals = intervals;
    sc.seed = replication_seed(root, r);
    sc.policy = PolicyMode::kThreshold;
    sc.thresholds = policy;
    const RunReport rep = run_simulation(inst, sc);
    a.ede += rep.ede.mean / reps;
    a.erc += rep.erc.mean / reps;
    a.euu += rep.euu.mean / reps;
    euu[r] = rep.euu.mean;
  }
  if (reps > 1) {
    double v = 0;
    for (double x : euu) v += (x - a.euu) * (x - a.euu);
    a.euu_hw = 1.96 * std::sqrt(v / (reps - 1) / reps);
  }
  return a;
}

}  // namespace

std::vector<CheckResult> check_channel(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  const auto t0 = Clock::now();
  const int instances = opt.quick ? 20 : 100;
  const long draws = opt.quick ? 100'000 : 1'000'000;
  const double nsigma = 3.0 * opt.tolerance_scale();
  Rng rng = substream(cfg.seed, {0xac1});
  const LinkBudget& b = cfg.budget;
  const double sd = cfg.geometry.horizontal_sd_m, h = cfg.geometry.height_m;

  int within = 0;
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    LinkRates rates;
    double p = 0.0;
    for (;;) {
      rates = {};
      const int nc = uniform_int(rng, 1, 4), ni = uniform_int(rng, 0, 3);
      for (int c = 0; c < nc; ++c)
        rates.lambda.push_back(b.lambda(distance_from_offset(horizontal(rng, sd), h),
                                        cfg.functions.tx_power(uniform(rng, 0.3, 1.0))));
      for (int c = 0; c < ni; ++c)
        rates.omega.push_back(b.omega(distance_from_offset(horizontal(rng, sd), h),
                                      cfg.functions.tx_power(uniform(rng, 0.3, 1.0))));
      try {
        p = success_probability_closed_form(rates, b);
        break;
      } catch (const DegenerateGeometry&) {
      }
    }
    Rng mc = substream(cfg.seed, {0xac1, 1, static_cast<std::uint64_t>(i)});
    const double est = success_probability_mc(rates, b, draws, mc);
    const double sigma = std::max(std::sqrt(p * (1.0 - p) / draws), 1.0 / draws);
    const double z = std::abs(est - p) / sigma;
    worst = std::max(worst, z);
    within += z <= nsigma;
  }
  CheckResult mc{"AC1", "channel closed form vs Monte Carlo"};
  mc.measured = double(within) / instances;
  mc.tolerance = 0.95;
  mc.pass = mc.measured >= mc.tolerance;
  mc.detail = fmt("%.0f/%.0f instances within %.0f sigma, worst %.2f sigma", within, instances, nsigma, worst);
  mc = finish(mc, t0);

  const auto t1 = Clock::now();
  double gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double d = distance_from_offset(horizontal(rng, sd), h);
    const double rho = cfg.functions.tx_power(uniform(rng, 0.1, 1.0));
    LinkRates r;
    r.lambda = {b.lambda(d, rho)};
    const double ref = std::exp(-b.snr_threshold * b.noise_w * std::pow(d, b.path_loss_exponent) / rho);
    gap = std::max(gap, std::abs(success_probability_closed_form(r, b) - ref));
  }
  CheckResult single{"AC1", "single link equals exp(-gamma sigma^2 d^a / rho)"};
  single.measured = gap;
  single.tolerance = 1e-12;
  single.pass = gap <= single.tolerance;
  single.detail = fmt("max abs gap %.3g over 200 links", gap);
  return {mc, finish(single, t1)};
}

std::vector<CheckResult> check_delivery_and_error(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  const auto t0 = Clock::now();
  const int instances = opt.quick ? 6 : 20;
  const int slots = opt.quick ? 20'000 : 100'000;
  const long steps = opt.quick ? 200'000 : 1'000'000;
  const double tol_e = 0.02 * opt.tolerance_scale(), tol_p = 0.01 * opt.tolerance_scale();
  const bool informational = cfg.mode == AnalysisMode::kAsPrinted;
  Rng rng = substream(cfg.seed, {0xac2});

  double worst_e = 0.0;
  for (int i = 0; i < instances; ++i) {
    ProblemInstance inst = small_instance(cfg, rng, 4, uniform_int(rng, 2, 4), 1);
    for (int k = 0; k < 4; ++k) inst.topology.accuracy(k, 0) = uniform(rng, 0.6, 1.0);
    inst.schedule.attributes = {0};
    inst.schedule.quorum = uniform_int(rng, 1, inst.topology.num_nmas);
    inst.scheme = Scheme::kUniform;
    inst.values = Eigen::MatrixXd::Constant(4, 1, inst.meta.mean());
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(4, 1);
    for (int k : inst.topology.observers[0]) alpha(k, 0) = uniform(rng, 0.2, 1.0);
    const double analytic = EffectivenessModel(inst).evaluate(alpha).attributes[0].failure;

    SimulationConfig sc;
    sc.intervals = slots;
    sc.seed = substream(cfg.seed, {0xac2, 1, static_cast<std::uint64_t>(i)})();
    sc.policy = PolicyMode::kFixedAlpha;
    sc.power = PowerMode::kAnalytic;
    sc.activation = alpha;
    const RunReport rep = run_simulation(inst, sc);
    worst_e = std::max(worst_e, std::abs(rep.attributes[0].failure_rate() - analytic));
  }
  CheckResult e{"AC2", "delivery failure vs simulated quorum failure"};
  e.measured = worst_e;
  e.tolerance = tol_e;
  e.informational = informational;
  e.pass = worst_e <= tol_e;
  e.detail = fmt("max |analytic - empirical| %.4f over %.0f instances", worst_e, instances);
  if (informational) e.detail += " (as-printed mode, informational)";
  e = finish(e, t0);

  const auto t1 = Clock::now();
  double worst_p = 0.0;
  for (int i = 0; i < instances; ++i) {
    const AttributeChain chain = AttributeChain::symmetric(0, uniform_int(rng, 2, 20), uniform(rng, 0.05, 0.9));
    const double failure = uniform(rng, 0.0, 1.0);
    const Scheme scheme = random_scheme(rng);
    const double analytic = steady_state_error(chain, failure, cfg.mode, scheme);
    Rng sim = substream(cfg.seed, {0xac2, 2, static_cast<std::uint64_t>(i)});
    worst_p = std::max(worst_p, std::abs(simulate_error_chain(chain, failure, scheme, steps, sim) - analytic));
  }
  CheckResult p{"AC2", "steady-state error vs error-chain simulation"};
  p.measured = worst_p;
  p.tolerance = tol_p;
  p.informational = informational;
  p.pass = worst_p <= tol_p;
  p.detail = fmt("max gap %.4f over %.0f chains", worst_p, instances);
  if (informational) p.detail += " (as-printed mode, informational)";
  return {e, finish(p, t1)};
}

std::vector<CheckResult> check_generation_rates(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  const double scale = opt.tolerance_scale();
  const int target_slots = opt.quick ? 20'000 : 100'000;
  std::vector<CheckResult> out;
  for (Scheme s : {Scheme::kUniform, Scheme::kChangeAware, Scheme::kSemanticsAware}) {
    const auto t0 = Clock::now();
    const ProblemInstance inst = build_instance(cfg, s, cfg.seed);
    SimulationConfig sc;
    sc.intervals = std::max(1, target_slots / inst.num_slots());
    sc.seed = substream(cfg.seed, {0xac3})();
    sc.policy = PolicyMode::kFixedAlpha;
    sc.activation = Eigen::MatrixXd::Constant(inst.topology.num_isas, inst.topology.num_attributes, 0.5);
    const RunReport rep = run_simulation(inst, sc);

    double expected = 0.0, tol = 0.01 * scale;
    long obs = 0;
    for (const auto& a : rep.attributes) {
      const AttributeChain& chain = inst.chains[a.attribute];
      double beta = 1.0;
      if (s == Scheme::kChangeAware) beta = chain.change_prob();
      if (s == Scheme::kSemanticsAware) beta = generation_probability(s, chain, a.error_rate());
      expected += beta * a.observer_slots;
      obs += a.observer_slots;
    }
    expected /= std::max(1L, obs);
    if (s == Scheme::kSemanticsAware) tol = 0.015 * scale;
    CheckResult r{"AC3", std::string("generation rate, ") + std::string(scheme_name(s))};
    r.measured = std::abs(rep.generation_rate - expected);
    r.tolerance = tol;
    r.pass = r.measured <= tol;
    r.detail = fmt("empirical %.4f expected %.4f over %.0f slots", rep.generation_rate, expected,
                   double(sc.intervals) * inst.num_slots());
    out.push_back(finish(r, t0));
  }
  const AttributeChain ref = AttributeChain::symmetric(0, 10, 0.2);
  const double at99 = generation_probability(Scheme::kSemanticsAware, ref, 0.99);
  CheckResult r{"AC3", "semantics-aware rate at P_e = 0.99 (I=10, p'=0.2)"};
  r.measured = std::abs(at99 - 0.91);
  r.tolerance = 0.005;
  r.pass = r.measured <= r.tolerance;
  r.detail = fmt("rate %.4f (steady-state error cannot exceed %.2f on this chain)", at99, 1.0 - 1.0 / ref.states);
  out.push_back(r);
  return out;
}

std::vector<CheckResult> check_threshold_identity(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  const auto t0 = Clock::now();
  const long slots = opt.quick ? 20'000 : 100'000;
  const double tol = 0.01 * opt.tolerance_scale();
  Rng rng = substream(cfg.seed, {0xac4});
  double worst = 0.0;
  std::string worst_case;
  for (int i = 0; i < 10; ++i) {
    const Scheme s = random_scheme(rng);
    const AttributeChain chain = AttributeChain::symmetric(0, uniform_int(rng, 2, 20), uniform(rng, 0.05, 0.9));
    const double beta = generation_probability(s, chain, uniform(rng, 0.0, 0.9));
    const double alpha = uniform(rng, 0.05, 1.0);
    const double th = threshold_from_alpha(alpha, beta, cfg.meta);
    Rng ev = substream(cfg.seed, {0xac4, 1, static_cast<std::uint64_t>(i)});
    long spoke = 0;
    for (long t = 0; t < slots; ++t) {
      const bool gen = uniform01(ev) < beta;
      spoke += decide_speak(th, gen, cfg.meta.sample(ev));
    }
    const double gap = std::abs(double(spoke) / slots - std::min(alpha, beta));
    if (gap >= worst) {
      worst = gap;
      worst_case = fmt("alpha %.3f beta %.3f", alpha, beta);
    }
  }
  CheckResult r{"AC4", "speak rate equals min(beta, alpha)"};
  r.measured = worst;
  r.tolerance = tol;
  r.pass = worst <= tol;
  r.detail = "max gap " + fmt("%.4f", worst) + " at " + worst_case;
  return {finish(r, t0)};
}

std::vector<CheckResult> check_optimizer_grid(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  const auto t0 = Clock::now();
  const int instances = opt.quick ? 5 : 20;
  const double scale = opt.tolerance_scale();
  Rng rng = substream(cfg.seed, {0xac5});
  OptimizerConfig oc = cfg.optimizer;
  oc.tying = AlphaTying::kPerAttribute;

  int passed = 0, skipped = 0, inactive = 0;
  double worst_obj = -1e300, worst_gap = 0.0, worst_eq14 = 0.0;
  std::string failures;
  for (int i = 0; i < instances; ++i) {
    ProblemInstance inst;
    // Instances where the constraint binds: the unconstrained grid minimiser
    // must violate it, otherwise the multiplier is zero and there is no
    // boundary to find.
    for (;;) {
      inst = small_instance(cfg, rng, uniform_int(rng, 2, 3), uniform_int(rng, 2, 3), 2);
      inst.budget.noise_w = dbm_to_watts(-120.0);
      inst.schedule.attributes = uniform01(rng) < 0.5 ? std::vector<int>{0} : std::vector<int>{0, 1};
      inst.schedule.quorum = uniform_int(rng, 1, inst.topology.num_nmas);
      inst.scheme = random_scheme(rng);
      inst.values.resize(inst.topology.num_isas, inst.num_slots());
      for (int k = 0; k < inst.values.rows(); ++k)
        for (int j = 0; j < inst.values.cols(); ++j) inst.values(k, j) = uniform(rng, 0.1, 1.0);
      inst.euu_min = 0.0;
      const EffectivenessModel probe(inst);
      const AlphaLayout lay(inst, oc.tying);
      const GridResult free = grid_search_oracle(probe, lay, 0.05);
      double top = 0.0;
      for (double a = 0.0; a <= 1.0 + 1e-12; a += 0.05)
        top = std::max(top, probe.evaluate(lay.expand(Eigen::VectorXd::Constant(lay.dimension(), a))).constraint);
      inst.euu_min = uniform(rng, 0.3, 0.7) * top;
      if (top > 0.0 && free.constraint < inst.euu_min) break;
      ++skipped;
    }
    const EffectivenessModel model(inst);
    const AlphaLayout layout(inst, oc.tying);
    try {
      const Solution s = solve_algorithm1(model, oc);
      ProblemInstance cal = inst;
      cal.functions.w1 = s.w1;
      cal.functions.h_scale = s.h_scale;
      const GridResult grid = grid_search_oracle(EffectivenessModel(cal), layout, 0.01);
      const double excess = s.features.objective - grid.objective;
      // With the fitted weights the optimum may sit inside the feasible set;
      // then only a violation counts.
      const double gap = s.constraint_active ? s.constraint_gap : std::max(0.0, inst.euu_min - s.features.constraint);
      inactive += !s.constraint_active;
      worst_obj = std::max(worst_obj, excess);
      worst_gap = std::max(worst_gap, gap);
      worst_eq14 = std::max(worst_eq14, s.eq14_relative_error);
      const bool ok = excess <= 1e-3 * scale && gap <= 1e-3 * scale &&
                      s.eq14_relative_error <= 0.01 * scale;
      passed += ok;
      if (!ok) failures += fmt(" #%.0f(excess %.2g gap %.2g eq14 %.2g)", i, excess, gap,
                               s.eq14_relative_error);
    } catch (const NotConverged& e) {
      failures += " #" + std::to_string(i) + "(" + e.what() + ")";
    }
  }
  CheckResult r{"AC5", "Algorithm 1 vs grid oracle"};
  r.measured = double(passed) / instances;
  r.tolerance = 1.0;
  r.pass = passed == instances;
  r.detail = fmt("%.0f/%.0f instances; worst excess %.2g, gap %.2g, ", passed, instances, worst_obj, worst_gap) +
             fmt("eq14 %.2g; %.0f non-binding draws skipped, ", worst_eq14, skipped) +
             fmt("%.0f interior after weight fit", inactive) + failures;
  return {finish(r, t0)};
}

std::vector<CheckResult> check_self_decision(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  const int intervals = opt.quick ? 100 : cfg.intervals;
  const int reps = opt.quick ? 4 : cfg.seeds;
  const double floor_ratio = 0.92;
  std::vector<CheckResult> out;
  std::vector<double> central_alpha;
  for (Scheme s : cfg.schemes) {
    const auto t0 = Clock::now();
    ProblemInstance inst = build_instance(cfg, s, cfg.seed);
    CheckResult r{"AC6", std::string("self-decision GoE ratio, ") + std::string(scheme_name(s))};
    r.tolerance = floor_ratio;
    try {
      const Solution central = solve_algorithm1(EffectivenessModel(inst), cfg.optimizer);
      inst.functions.w1 = central.w1;
      inst.functions.h_scale = central.h_scale;
      const EffectivenessModel model(inst);
      central_alpha.push_back(central.alpha_star.maxCoeff());

      LocalEstimationConfig lc;
      lc.surrogate = cfg.local_surrogate;
      lc.draws = opt.quick ? std::min(cfg.local_draws, 200) : cfg.local_draws;
      lc.seed = cfg.seed;
      lc.geometry = cfg.geometry;
      lc.optimizer = cfg.optimizer;
      const Eigen::MatrixXd local = estimate_all_locally(inst, lc);

      const std::uint64_t root = substream(cfg.seed, {0xac6})();
      const Aggregate c = simulate_policy(inst, thresholds_from_alpha(model, central.alpha_star), intervals, reps, root);
      const Aggregate l = simulate_policy(inst, thresholds_from_alpha(model, local), intervals, reps, root);
      const auto& f = inst.functions;
      const double gc = f.w1 * f.g(1, c.ede) + f.w2() * f.g(2, c.erc);
      const double gl = f.w1 * f.g(1, l.ede) + f.w2() * f.g(2, l.erc);
      const bool feasible = f.g(3, l.euu + l.euu_hw) >= inst.euu_min;
      r.measured = gl > 0.0 ? std::min(1.0, gc / gl) : 1.0;
      r.pass = feasible && r.measured >= floor_ratio;
      r.detail = fmt("G central %.5g local %.5g; local EUU %.4f +- %.4f", gc, gl, l.euu, l.euu_hw) +
                 (feasible ? "" : " (local thresholds infeasible)") +
                 fmt("; local alpha mean %.4f central %.4f", local.sum() / std::max(1L, (local.array() > 0).count()),
                     central.alpha_star.maxCoeff());
    } catch (const Error& e) {
      r.pass = false;
      r.detail = e.what();
    }
    out.push_back(finish(r, t0));
  }
  if (central_alpha.size() == 3) {
    // Reported tied activations in scheme order uniform, change, semantics.
    const double reported[3] = {0.64, 0.67, 0.64};
    double dev = 0.0;
    for (int i = 0; i < 3; ++i) dev = std::max(dev, std::abs(central_alpha[i] - reported[i]));
    const bool order = central_alpha[1] >= central_alpha[0] && central_alpha[1] >= central_alpha[2];
    CheckResult q{"AC6", "tied alpha vs reported 0.64/0.67/0.64 (qualitative)"};
    q.informational = true;
    q.measured = dev;
    q.tolerance = 0.1;
    q.pass = dev <= 0.1 && order;
    q.detail = fmt("uniform %.4f change %.4f semantics %.4f", central_alpha[0], central_alpha[1], central_alpha[2]) +
               (order ? ", change-aware highest" : ", change-aware not highest");
    out.push_back(q);
  }
  return out;
}

std::vector<CheckResult> check_large_states(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  (void)opt;
  const auto t0 = Clock::now();
  const AttributeChain big = AttributeChain::symmetric(0, 10'000, 1.0 / 10'000);
  const double pe = steady_state_error(big, 0.5, AnalysisMode::kNormalized, Scheme::kUniform);
  CheckResult a{"AC7", "steady-state error at I = 1e4 with failure 0.5"};
  a.measured = std::abs(pe - 0.5);
  a.tolerance = 0.01;
  a.pass = a.measured <= a.tolerance;
  a.detail = fmt("P_e %.5f", pe);
  a = finish(a, t0);

  const auto t1 = Clock::now();
  CheckResult b{"AC7", "large-state closed form vs Algorithm 1"};
  b.tolerance = 0.05;
  try {
    ExperimentConfig big_cfg = cfg;
    for (auto& spec : big_cfg.attributes) spec.states = 10'000;
    ProblemInstance inst = build_instance(big_cfg, Scheme::kUniform, cfg.seed);
    for (auto& c : inst.chains) c = AttributeChain::symmetric(c.index, 10'000, 1.0 / 10'000);
    const Solution s = solve_algorithm1(EffectivenessModel(inst), cfg.optimizer);
    inst.functions.w1 = s.w1;
    inst.functions.h_scale = s.h_scale;
    const EffectivenessModel model(inst);
    double worst = 0.0;
    int cells = 0, degenerate = 0;
    for (int j = 0; j < inst.num_slots(); ++j) {
      const int n = inst.schedule.attributes[j];
      for (int k : inst.topology.observers[n]) {
        try {
          const double closed = large_state_alpha(model, k, j, s.alpha_star, s.eta, s.w1);
          worst = std::max(worst, std::abs(closed - s.alpha_star(k, n)));
          ++cells;
        } catch (const DegenerateSplit&) {
          ++degenerate;
        }
      }
    }
    b.measured = worst;
    b.pass = cells > 0 && worst <= b.tolerance;
    b.detail = fmt("max |closed - solver| %.4f over %.0f cells (solver alpha %.4f, eta %.4g)", worst, cells,
                   s.alpha_star.maxCoeff(), s.eta) +
               (degenerate ? fmt("; %.0f degenerate cells", degenerate) : "");
  } catch (const Error& e) {
    b.pass = false;
    b.detail = e.what();
  }
  return {a, finish(b, t1)};
}

std::vector<CheckResult> check_figure_trends(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  const int intervals = opt.quick ? 100 : cfg.intervals;
  const int reps = opt.quick ? 4 : cfg.seeds;
  std::vector<CheckResult> out;

  auto t0 = Clock::now();
  const ProblemInstance inst = build_instance(cfg, cfg.schemes.front(), cfg.seed);
  const auto rows = sweep_threshold(inst, cfg.schemes, cfg.threshold_grid, intervals, reps, cfg.seed);
  for (Scheme s : cfg.schemes) {
    const int roots = count_constraint_roots(rows, s, cfg.euu_min);
    CheckResult r{"AC8", std::string("EUU_min crossings vs threshold, ") + std::string(scheme_name(s))};
    r.measured = roots;
    r.tolerance = 2;
    r.pass = roots == 2;
    std::string euu;
    for (const auto& row : rows)
      if (row.scheme == s) euu += fmt(" %.3f", row.constraint);
    r.detail = fmt("%.0f crossings; g3(EUU) over grid:", roots) + euu;
    out.push_back(finish(r, t0));
    t0 = Clock::now();
  }

  const auto states = sweep_states(inst, cfg.state_grid, cfg.size_grid);
  bool complete = true, monotone = true;
  auto at = [&](int i, int a) -> std::optional<double> {
    for (const auto& r : states)
      if (r.states == i && r.attributes == a) return r.objective;
    return std::nullopt;
  };
  std::string table;
  for (int a : cfg.size_grid)
    for (std::size_t i = 0; i < cfg.state_grid.size(); ++i) {
      const auto v = at(cfg.state_grid[i], a);
      table += v ? fmt(" %.4g", *v) : std::string(" -");
      if (!v) {
        complete = false;
        continue;
      }
      if (i > 0)
        if (auto prev = at(cfg.state_grid[i - 1], a); prev && *v < *prev * (1.0 - 1e-9)) monotone = false;
    }
  for (int i : cfg.state_grid)
    for (std::size_t a = 1; a < cfg.size_grid.size(); ++a) {
      const auto lo = at(i, cfg.size_grid[a - 1]), hi = at(i, cfg.size_grid[a]);
      if (lo && hi && *hi < *lo * (1.0 - 1e-9)) monotone = false;
    }
  CheckResult f{"AC8", "lowest feasible objective monotone in I_n and |A_t|"};
  f.measured = monotone && complete;
  f.tolerance = 1;
  f.pass = monotone && complete;
  f.detail = "rows by size then states:" + table;
  out.push_back(finish(f, t0));

  t0 = Clock::now();
  std::ostringstream first, second;
  const auto a = sweep_threshold(inst, cfg.schemes, {0.2, 0.6}, 20, 2, cfg.seed);
  const auto b = sweep_threshold(inst, cfg.schemes, {0.2, 0.6}, 20, 2, cfg.seed);
  write_threshold_csv(first, a, "check");
  write_threshold_csv(second, b, "check");
  CheckResult d{"AC8", "sweep output identical for a repeated seed"};
  d.pass = first.str() == second.str();
  d.measured = d.pass;
  d.tolerance = 1;
  d.detail = d.pass ? "byte-identical" : "outputs differ";
  out.push_back(finish(d, t0));
  return out;
}

std::vector<CheckResult> run_validation(const ExperimentConfig& cfg, const ValidationOptions& opt) {
  std::vector<CheckResult> all;
  for (auto* fn : {&check_channel, &check_delivery_and_error, &check_generation_rates, &check_threshold_identity,
                   &check_optimizer_grid, &check_self_decision, &check_large_states, &check_figure_trends}) {
    auto part = fn(cfg, opt);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass || r.informational; });
}

void print_results(std::ostream& out, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    const char* tag = r.pass ? "PASS" : (r.informational ? "INFO" : "FAIL");
    char head[96];
    std::snprintf(head, sizeof head, "%s %s measured=%.6g tol=%.6g (%.1fs) ", r.id.c_str(), tag, r.measured,
                  r.tolerance, r.seconds);
    out << head << r.name << ": " << r.detail << '\n';
  }
}

std::string results_json(const std::vector<CheckResult>& results, const std::string& provenance) {
  nlohmann::ordered_json j;
  j["provenance"] = provenance;
  j["passed"] = all_passed(results);
  for (const auto& r : results)
    j["checks"].push_back({{"id", r.id},
                           {"name", r.name},
                           {"pass", r.pass},
                           {"informational", r.informational},
                           {"measured", r.measured},
                           {"tolerance", r.tolerance},
                           {"detail", r.detail},
                           {"seconds", r.seconds}});
  return j.dump(2);
}

}  // namespace goemax
