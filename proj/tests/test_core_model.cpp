#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

using namespace goemax;

TEST_SUITE("core_model") {
  TEST_CASE("two-state chain that always stays is frozen") {
    AttributeChain c = AttributeChain::symmetric(0, 2, 1.0);
    Rng rng = substream(3, {1});
    for (int t = 0; t < 1000; ++t) CHECK(dtmc_step(c, rng) == 0);
  }

  TEST_CASE("change frequency for I=10, p'=0.2") {
    AttributeChain c = AttributeChain::symmetric(0, 10, 0.2);
    CHECK(c.change_prob() == doctest::Approx(0.8).epsilon(1e-12));
    Rng rng = substream(5, {1});
    int changes = 0;
    const int steps = 100000;
    for (int t = 0; t < steps; ++t) {
      const int prev = c.state;
      changes += dtmc_step(c, rng) != prev;
    }
    CHECK(std::abs(double(changes) / steps - 0.8) <= 0.01);
  }

  TEST_CASE("occupancy is uniform for a symmetric chain") {
    AttributeChain c = AttributeChain::symmetric(0, 3, 0.4);
    Rng rng = substream(9, {1});
    int count[3] = {0, 0, 0};
    for (int t = 0; t < 100000; ++t) ++count[dtmc_step(c, rng)];
    for (int s = 0; s < 3; ++s) CHECK(std::abs(count[s] / 1e5 - 1.0 / 3.0) <= 0.01);
  }

  TEST_CASE("transition matrix is stochastic") {
    for (int states : {2, 5, 17}) {
      const auto p = AttributeChain::symmetric(0, states, 0.3).transition_matrix();
      for (int i = 0; i < states; ++i) CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p(0, 0) == doctest::Approx(0.3));
    }
  }

  TEST_CASE("invalid chains are rejected") {
    CHECK_THROWS(AttributeChain::symmetric(0, 1, 0.5).validate());
    CHECK_THROWS(AttributeChain::symmetric(0, 4, 1.5).validate());
  }

  TEST_CASE("distance from horizontal offset and height") {
    CHECK(distance_from_offset(0.0, 7.0) == doctest::Approx(7.0));
    CHECK(distance_from_offset(24.0, 7.0) == doctest::Approx(25.0));
  }

  TEST_CASE("sampled topology: shapes, observer sets and half-normal offsets") {
    GeometryConfig g;
    Rng rng = substream(11, {0});
    double sum = 0.0;
    long n = 0;
    for (int rep = 0; rep < 250; ++rep) {
      const Topology t = sample_topology(g, rng);
      REQUIRE(t.distance.rows() == 10);
      REQUIRE(t.distance.cols() == 4);
      for (int a = 0; a < t.num_attributes; ++a) {
        CHECK_FALSE(t.observers[a].empty());
        for (int k : t.observers[a]) CHECK(t.observes(k, a));
      }
      for (int k = 0; k < 10; ++k)
        for (int m = 0; m < 4; ++m) {
          CHECK(t.distance(k, m) >= 7.0);
          sum += std::sqrt(std::max(0.0, t.distance(k, m) * t.distance(k, m) - 49.0));
          ++n;
        }
    }
    CHECK(std::abs(sum / n - 60.0 * std::sqrt(2.0 / M_PI)) <= 1.0);
  }

  TEST_CASE("observer sets and observable lists agree") {
    GeometryConfig g;
    Rng rng = substream(2, {0});
    const Topology t = sample_topology(g, rng);
    for (int k = 0; k < t.num_isas; ++k)
      for (int a : t.observable[k]) {
        const auto& obs = t.observers[a];
        CHECK(std::find(obs.begin(), obs.end(), k) != obs.end());
      }
  }

  TEST_CASE("Beta(2,2) inverse CDF") {
    MetaValueModel m;
    CHECK(meta_value_inverse_cdf(m, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(meta_value_inverse_cdf(m, 0.0) == doctest::Approx(0.0));
    CHECK(meta_value_inverse_cdf(m, 1.0) == doctest::Approx(1.0));
    const double root = testing::bisect(0.0, 1.0, [](double v) { return 3 * v * v - 2 * v * v * v - 0.25; });
    CHECK(meta_value_inverse_cdf(m, 0.25) == doctest::Approx(root).epsilon(1e-9));
    CHECK(root == doctest::Approx(0.3264).epsilon(1e-4));
  }

  TEST_CASE("inverse CDF round-trips for a non-symmetric Beta") {
    MetaValueModel m{2.5, 4.0};
    for (double u : {0.01, 0.2, 0.5, 0.77, 0.99}) CHECK(m.cdf(meta_value_inverse_cdf(m, u)) == doctest::Approx(u).epsilon(1e-9));
  }

  TEST_CASE("meta-value samples have the law's mean") {
    MetaValueModel m;
    Rng rng = substream(4, {0});
    double s = 0.0;
    for (int i = 0; i < 100000; ++i) s += m.sample(rng);
    CHECK(std::abs(s / 1e5 - 0.5) <= 0.005);
  }
}
