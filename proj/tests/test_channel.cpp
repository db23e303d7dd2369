#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

#include "goemax/channel.hpp"

using namespace goemax;

namespace {

LinkBudget budget(double gamma = 10.0, double noise = 1e-15) {
  LinkBudget b;
  b.snr_threshold = gamma;
  b.noise_w = noise;
  return b;
}

LinkRates random_rates(Rng& rng, int nc, int ni) {
  const LinkBudget b = budget();
  LinkRates r;
  for (int i = 0; i < nc; ++i) r.lambda.push_back(b.lambda(distance_from_offset(100 * uniform01(rng), 7), 0.01 + 0.09 * uniform01(rng)));
  for (int i = 0; i < ni; ++i) r.omega.push_back(b.omega(distance_from_offset(100 * uniform01(rng), 7), 0.01 + 0.09 * uniform01(rng)));
  return r;
}

// Pr(fewer than q successes) by enumerating every success pattern.
double quorum_failure_bruteforce(const std::vector<double>& p, int q) {
  const int m = static_cast<int>(p.size());
  double fail = 0.0;
  for (int mask = 0; mask < (1 << m); ++mask) {
    double w = 1.0;
    int c = 0;
    for (int i = 0; i < m; ++i) {
      const bool ok = mask >> i & 1;
      w *= ok ? p[i] : 1.0 - p[i];
      c += ok;
    }
    if (c < q) fail += w;
  }
  return fail;
}

}  // namespace

TEST_SUITE("channel") {
  TEST_CASE("single link outage is exp(-1) when gamma sigma^2 Lambda = 1") {
    const LinkBudget b = budget();
    LinkRates r;
    r.lambda = {1.0 / (b.snr_threshold * b.noise_w)};
    CHECK(success_probability_closed_form(r, b) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    Rng rng = substream(1, {1});
    CHECK(std::abs(success_probability_mc(r, b, 1'000'000, rng) - 0.3679) <= 0.002);
  }

  TEST_CASE("noise-free limit and vanishing threshold") {
    LinkRates r;
    r.lambda = {1e-6};
    CHECK(success_probability_closed_form(r, budget()) == doctest::Approx(1.0).epsilon(1e-6));
    const LinkBudget tiny = budget(1e-9);
    LinkRates with_i;
    with_i.lambda = {tiny.lambda(50.0, 0.1)};
    with_i.omega = {tiny.omega(50.0, 0.1)};
    Rng rng = substream(2, {1});
    CHECK(success_probability_mc(with_i, tiny, 100000, rng) >= 0.999);
  }

  TEST_CASE("helper plus interferer agrees with Monte Carlo") {
    const LinkBudget b = budget(10.0, 1e-15);
    LinkRates r;
    r.lambda = {1.0e-3, 2.0e-3};
    r.omega = {5.0e-4};
    const double exact = success_probability_closed_form(r, b);
    Rng rng = substream(3, {1});
    CHECK(std::abs(success_probability_mc(r, b, 1'000'000, rng) - exact) <= 3e-3);
  }

  TEST_CASE("randomised two-helper two-interferer instances within 3 sigma") {
    const LinkBudget b = budget();
    int within = 0;
    for (int i = 0; i < 100; ++i) {
      Rng rng = substream(40 + i, {2});
      const LinkRates r = random_rates(rng, 2, 2);
      const double p = success_probability(r, b);
      const long draws = 20000;
      const double est = success_probability_mc(r, b, draws, rng);
      within += std::abs(est - p) <= 3.0 * std::max(std::sqrt(p * (1 - p) / draws), 1.0 / draws);
    }
    CHECK(within >= 95);
  }

  TEST_CASE("closed form and phase-type agree") {
    const LinkBudget b = budget();
    for (int i = 0; i < 50; ++i) {
      Rng rng = substream(100 + i, {3});
      const LinkRates r = random_rates(rng, 1 + i % 4, i % 3);
      CHECK(success_probability_phase_type(r, b) == doctest::Approx(success_probability_closed_form(r, b)).epsilon(1e-8));
    }
  }

  TEST_CASE("coincident rates: closed form refuses, dispatcher falls back") {
    const LinkBudget b = budget();
    LinkRates r;
    r.lambda = {2e13, 2e13};
    r.omega = {1e13};
    CHECK_THROWS_AS(success_probability_closed_form(r, b), DegenerateGeometry);
    const double p = success_probability(r, b);
    Rng rng = substream(4, {1});
    CHECK(std::abs(success_probability_mc(r, b, 400000, rng) - p) <= 0.004);
  }

  TEST_CASE("Chernoff bound dominates the exact probability") {
    const LinkBudget b = budget();
    for (int i = 0; i < 100; ++i) {
      Rng rng = substream(200 + i, {5});
      const LinkRates r = random_rates(rng, 1 + i % 3, i % 4);
      const double exact = success_probability(r, b);
      const double bound = chernoff_success_bound(r, b);
      CHECK(bound >= exact - 1e-12);
      CHECK(bound <= 1.0);
    }
  }

  TEST_CASE("bound over collaborator outcomes is a weighted mean of bounds") {
    const LinkBudget b = budget();
    Rng rng = substream(6, {5});
    const LinkRates a = random_rates(rng, 2, 2);
    std::vector<CollaboratorOutcome> outs{{0.25, a.lambda}, {0.75, {a.lambda[0]}}};
    LinkRates one{{a.lambda[0]}, a.omega};
    const double expected = 0.25 * chernoff_success_bound(a, b) + 0.75 * chernoff_success_bound(one, b);
    CHECK(success_probability_upper_bound(outs, a.omega, b) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("printed Markov expression is clamped") {
    LinkRates r;
    r.lambda = {1e-3};
    CHECK(markov_expression_as_printed(r, budget(), false) > 1.0);
    CHECK(markov_expression_as_printed(r, budget()) == 1.0);
  }

  TEST_CASE("quorum failure matches enumeration") {
    Rng rng = substream(7, {1});
    for (int m = 1; m <= 6; ++m)
      for (int q = 0; q <= m; ++q) {
        std::vector<double> p(m);
        for (double& x : p) x = uniform01(rng);
        CHECK(quorum_failure(p, q) == doctest::Approx(quorum_failure_bruteforce(p, q)).epsilon(1e-12));
      }
  }

  TEST_CASE("farthest NMAs are ordered by distance") {
    Topology t;
    t.num_isas = 1;
    t.num_nmas = 4;
    t.distance.resize(1, 4);
    t.distance << 10, 40, 40, 20;
    CHECK(farthest_nmas(t, 0, 2) == std::vector<int>{1, 2});
    CHECK(farthest_nmas(t, 0, 3) == std::vector<int>{1, 2, 3});
  }
}
