#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

#include "goemax/simulator.hpp"

using namespace goemax;

namespace {

// One ISA observing one attribute, one NMA.
ProblemInstance single_isa(double distance_m, double noise_w, double q) {
  ProblemInstance inst;
  Eigen::MatrixXd d(1, 1);
  d << distance_m;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(1, 1, q);
  inst.topology = Topology::from_observers(d, {{0}}, acc, 7.0);
  inst.chains = {AttributeChain::symmetric(0, 4, 0.5)};
  inst.schedule.attributes = {0};
  inst.schedule.quorum = 1;
  inst.budget.noise_w = noise_w;
  inst.values = Eigen::MatrixXd::Constant(1, 1, 0.8);
  return inst;
}

double simulate_error(const AttributeChain& chain, double failure, Scheme s, long steps, Rng& rng) {
  int truth = 0, est = 0;
  long err = 0;
  for (long t = 0; t < steps; ++t) {
    const int prev = truth;
    if (uniform01(rng) >= chain.stay_prob) truth = (truth + 1 + int(uniform01(rng) * (chain.states - 1))) % chain.states;
    const bool gen = s == Scheme::kUniform || (s == Scheme::kChangeAware ? truth != prev : truth != est);
    if (gen && uniform01(rng) >= failure) est = truth;
    err += truth != est;
  }
  return double(err) / steps;
}

}  // namespace

TEST_SUITE("effectiveness") {
  TEST_CASE("features vanish without activation") {
    const EffectivenessModel m(testing::default_instance());
    const auto r = m.evaluate(Eigen::MatrixXd::Zero(10, 10));
    CHECK(r.f1 == 0.0);
    CHECK(r.ede == 0.0);
    CHECK(r.erc == 0.0);
    CHECK(r.euu == 0.0);
  }

  TEST_CASE("one-term usefulness and resource sums") {
    const ProblemInstance inst = single_isa(20.0, 1e-15, 1.0);
    Eigen::MatrixXd rate = Eigen::MatrixXd::Constant(1, 1, 0.5);
    CHECK(usefulness_sum_f1(rate, inst.values, inst.schedule, inst.topology) == doctest::Approx(0.4));
    GoEFunctions f;
    f.h_scale = 1.0;
    f.power_scale_w = 0.1;
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(1, 1, 0.5);
    CHECK(resource_sum_f2(one, v, inst.schedule, inst.topology, f) == doctest::Approx(0.025));
    CHECK(f.resource_term(1.0, 0.0) == 0.0);
    CHECK(f.resource_term(1.0, 1e-9) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("perfect sensor on a perfect channel never fails") {
    const EffectivenessModel m(single_isa(7.0, 1e-30, 1.0));
    const auto r = m.evaluate(Eigen::MatrixXd::Ones(1, 1));
    CHECK(r.attributes[0].failure == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("silent observer: failure 1 normalized, 1/2 as printed") {
    ProblemInstance inst = single_isa(20.0, 1e-15, 0.8);
    CHECK(EffectivenessModel(inst).evaluate(Eigen::MatrixXd::Zero(1, 1)).attributes[0].failure == 1.0);
    inst.mode = AnalysisMode::kAsPrinted;
    CHECK(EffectivenessModel(inst).evaluate(Eigen::MatrixXd::Zero(1, 1)).attributes[0].failure == doctest::Approx(0.5));
  }

  TEST_CASE("enumeration agrees with sampled observer states") {
    ProblemInstance inst = testing::tiny_instance(3, 3, 2, 1);
    inst.topology.observers[0] = {0, 1, 2};
    const DeliveryTable t = build_delivery_table(inst, 0);
    const std::vector<double> act{0.3, 0.7, 0.9}, acc{0.9, 0.6, 0.8};
    Rng rng = substream(8, {0});
    double s = 0.0;
    const int draws = 400000;
    for (int i = 0; i < draws; ++i) {
      int idx = 0, stride = 1;
      for (int o = 0; o < 3; ++o, stride *= 3) {
        const int st = uniform01(rng) >= act[o] ? 0 : (uniform01(rng) < acc[o] ? 1 : 2);
        idx += st * stride;
      }
      s += t.failure[idx];
    }
    CHECK(std::abs(s / draws - delivery_failure_prob(t, act, acc, AnalysisMode::kNormalized)) <= 0.003);
  }

  TEST_CASE("equal-activation polynomial matches the general enumeration") {
    const ProblemInstance inst = testing::default_instance();
    const DeliveryTable t = build_delivery_table(inst, 0);
    std::vector<double> acc(t.size(), 0.8);
    const auto c = equal_activation_coefficients(t, acc);
    for (double a : {0.0, 0.1, 0.45, 0.9, 1.0}) {
      std::vector<double> act(t.size(), a);
      for (auto mode : {AnalysisMode::kNormalized, AnalysisMode::kAsPrinted})
        CHECK(equal_activation_failure(c, a, mode) ==
              doctest::Approx(delivery_failure_prob(t, act, acc, mode)).epsilon(1e-12));
    }
  }

  TEST_CASE("tied evaluation takes the same value as a perturbed-then-restored matrix") {
    const EffectivenessModel m(testing::default_instance(Scheme::kChangeAware));
    const Eigen::MatrixXd tied = Eigen::MatrixXd::Constant(10, 10, 0.4);
    Eigen::MatrixXd nearly = tied;
    nearly(0, 0) += 1e-13;  // defeats the equal-activation shortcut
    CHECK(m.evaluate(tied).objective == doctest::Approx(m.evaluate(nearly).objective).epsilon(1e-9));
    CHECK(m.evaluate(tied).euu == doctest::Approx(m.evaluate(nearly).euu).epsilon(1e-9));
  }

  TEST_CASE("steady-state error: limits") {
    const AttributeChain c = AttributeChain::symmetric(0, 7, 0.3);
    CHECK(steady_state_error(c, 0.0) == 0.0);
    CHECK(steady_state_error(AttributeChain::symmetric(0, 2, 0.5), 1.0) == doctest::Approx(0.5));
    const AttributeChain big = AttributeChain::symmetric(0, 10000, 1e-4);
    CHECK(std::abs(steady_state_error(big, 0.5) - 0.5) <= 0.01);
  }

  TEST_CASE("steady-state error matches chain simulation for every scheme") {
    for (Scheme s : {Scheme::kUniform, Scheme::kChangeAware, Scheme::kSemanticsAware})
      for (double e : {0.1, 0.5, 0.9}) {
        const AttributeChain c = AttributeChain::symmetric(0, 6, 0.35);
        Rng rng = substream(12, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(e * 10)});
        CHECK(std::abs(simulate_error(c, e, s, 400000, rng) - steady_state_error(c, e, AnalysisMode::kNormalized, s)) <=
              0.01);
      }
  }

  TEST_CASE("steady-state error is nondecreasing in the failure probability") {
    const AttributeChain c = AttributeChain::symmetric(0, 5, 0.2);
    for (Scheme s : {Scheme::kUniform, Scheme::kChangeAware, Scheme::kSemanticsAware}) {
      double prev = -1.0;
      for (double e = 0.0; e <= 1.0; e += 0.05) {
        const double p = steady_state_error(c, e, AnalysisMode::kNormalized, s);
        CHECK(p >= prev - 1e-15);
        CHECK(p <= 1.0);
        prev = p;
      }
    }
  }

  TEST_CASE("default setup at alpha 0.6: F1 is 0.3 per observer") {
    const ProblemInstance inst = testing::default_instance();
    const auto r = EffectivenessModel(inst).evaluate(Eigen::MatrixXd::Constant(10, 10, 0.6));
    double expected = 0.0;
    for (int n = 0; n < 10; ++n) expected += 0.3 * inst.topology.observers[n].size();
    CHECK(r.f1 == doctest::Approx(expected).epsilon(1e-12));
    CHECK(r.ede == doctest::Approx(r.f1 * r.error_sum()).epsilon(1e-12));
    CHECK(r.euu == doctest::Approx(r.f1 * r.success_product()).epsilon(1e-12));
  }

  TEST_CASE("default setup at alpha 0.6: EDE agrees with simulation within 5%") {
    const ProblemInstance inst = testing::default_instance();
    const EffectivenessModel m(inst);
    const Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(10, 10, 0.6);
    const double analytic = m.evaluate(alpha).ede;
    double sim = 0.0;
    const int reps = 8;
    for (int r = 0; r < reps; ++r) {
      SimulationConfig sc;
      sc.intervals = 500;
      sc.seed = 100 + r;
      sc.policy = PolicyMode::kFixedAlpha;
      sc.power = PowerMode::kAnalytic;
      sc.activation = activation_from_alpha(m, alpha);
      sim += run_simulation(inst, sc).ede.mean / reps;
    }
    CHECK(std::abs(sim - analytic) <= 0.05 * analytic);
  }

  TEST_CASE("a certainly lost attribute annihilates ERC and EUU") {
    ProblemInstance inst = testing::tiny_instance(5, 2, 2, 2);
    const EffectivenessModel m(inst);
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(2, 2, 0.7);
    for (int k : inst.topology.observers[1]) alpha(k, 1) = 0.0;
    const auto r = m.evaluate(alpha);
    CHECK(r.attributes[1].failure == 1.0);
    CHECK(r.erc == 0.0);
    CHECK(r.euu == 0.0);
  }

  TEST_CASE("scheme-aware generation and activation") {
    const EffectivenessModel m(testing::default_instance(Scheme::kChangeAware));
    const auto r = m.evaluate(Eigen::MatrixXd::Constant(10, 10, 0.5));
    for (const auto& a : r.attributes) {
      CHECK(a.generation == doctest::Approx(0.8));
      CHECK(a.failure == doctest::Approx(a.generation * a.failure_given_gen).epsilon(1e-12));
    }
    const auto sat = m.evaluate(Eigen::MatrixXd::Constant(10, 10, 0.95));
    const auto at_beta = m.evaluate(Eigen::MatrixXd::Constant(10, 10, 0.8));
    CHECK(sat.objective == doctest::Approx(at_beta.objective).epsilon(1e-12));
  }

  TEST_CASE("semantics-aware generation is a fixed point") {
    const EffectivenessModel m(testing::default_instance(Scheme::kSemanticsAware));
    const auto r = m.evaluate(Eigen::MatrixXd::Constant(10, 10, 0.3));
    const ProblemInstance& inst = m.instance();
    for (const auto& a : r.attributes)
      CHECK(a.generation ==
            doctest::Approx(generation_probability(Scheme::kSemanticsAware, inst.chains[a.attribute], a.error)).epsilon(1e-8));
  }

  TEST_CASE("enumeration cap is enforced") {
    ProblemInstance inst = testing::default_instance();
    inst.enumeration_cap = 2;
    CHECK_THROWS_AS(EffectivenessModel{inst}, EnumerationTooLarge);
  }
}
