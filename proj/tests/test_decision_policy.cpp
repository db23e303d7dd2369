#include "doctest.h"
#include "helpers.hpp"

#include "goemax/decision_policy.hpp"

using namespace goemax;

TEST_SUITE("decision_policy") {
  TEST_CASE("generation probabilities") {
    const AttributeChain c = AttributeChain::symmetric(0, 10, 0.2);
    CHECK(generation_probability(Scheme::kUniform, c, 0.3) == 1.0);
    CHECK(generation_probability(Scheme::kChangeAware, c, 0.3) == doctest::Approx(0.8));
    const double expected = 0.8 + (1.0 - 10.0 * (0.8 / 9.0)) * 0.99;
    CHECK(generation_probability(Scheme::kSemanticsAware, c, 0.99) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.91).epsilon(1e-3));
    CHECK(generation_probability(Scheme::kUniform, c, 0.3, false) == 0.0);
  }

  TEST_CASE("semantics-aware rate stays in [0, 1] for every valid error probability") {
    for (int states : {2, 3, 10, 1000})
      for (double stay : {0.0, 0.2, 0.9, 1.0})
        for (double pe = 0.0; pe <= 1.0; pe += 0.05) {
          bool clamped = true;
          const double g =
              generation_probability(Scheme::kSemanticsAware, AttributeChain::symmetric(0, states, stay), pe, true, &clamped);
          CHECK(g >= 0.0);
          CHECK(g <= 1.0);
          CHECK_FALSE(clamped);
        }
  }

  TEST_CASE("scheme names round-trip") {
    for (Scheme s : {Scheme::kUniform, Scheme::kChangeAware, Scheme::kSemanticsAware})
      CHECK(parse_scheme(scheme_name(s)) == s);
    CHECK_FALSE(parse_scheme("bogus").has_value());
  }

  TEST_CASE("thresholds from activation") {
    MetaValueModel m;
    CHECK(threshold_from_alpha(0.9, 0.8, m) == 0.0);
    CHECK(threshold_from_alpha(0.0, 0.8, m) == 1.0);
    const double root = testing::bisect(0.0, 1.0, [](double v) { return 3 * v * v - 2 * v * v * v - 0.25; });
    CHECK(threshold_from_alpha(0.75 * 0.8, 0.8, m) == doctest::Approx(root).epsilon(1e-9));
  }

  TEST_CASE("speak decision") {
    CHECK_FALSE(decide_speak(0.0, false, 0.9));
    CHECK(decide_speak(0.3264, true, 0.5));
    CHECK_FALSE(decide_speak(0.3264, true, 0.2));
  }

  TEST_CASE("long-run speak rate is min(beta, alpha)") {
    MetaValueModel m;
    Rng rng = substream(21, {0});
    for (double beta : {1.0, 0.8, 0.55})
      for (double alpha : {0.2, 0.5, 0.9}) {
        const double th = threshold_from_alpha(alpha, beta, m);
        long spoke = 0;
        const long n = 100000;
        for (long i = 0; i < n; ++i) spoke += decide_speak(th, uniform01(rng) < beta, m.sample(rng));
        CHECK(std::abs(double(spoke) / n - std::min(alpha, beta)) <= 0.01);
      }
  }

  TEST_CASE("acquisition state triggers") {
    AcquisitionState u(Scheme::kUniform, 2), c(Scheme::kChangeAware, 2), s(Scheme::kSemanticsAware, 2);
    CHECK(u.generates(0, 3, 3));
    CHECK_FALSE(c.generates(0, 3, 3));
    CHECK(c.generates(0, 2, 3));
    s.record_decoded(1, 4);
    CHECK_FALSE(s.generates(1, 4, 0));
    CHECK(s.generates(1, 2, 2));
  }
}
