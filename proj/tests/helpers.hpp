#pragma once

#include <Eigen/Dense>
#include <random>

#include "goemax/config.hpp"
#include "goemax/effectiveness.hpp"

namespace testing {

using namespace goemax;

inline ProblemInstance default_instance(Scheme s = Scheme::kUniform) {
  return build_instance(default_config(), s, 1);
}

// Few ISAs, every attribute queried once in index order.
inline ProblemInstance tiny_instance(std::uint64_t seed, int isas, int nmas, int attributes, int states = 4,
                                     double stay = 0.6) {
  GeometryConfig g;
  g.num_isas = isas;
  g.num_nmas = nmas;
  g.num_attributes = attributes;
  Rng rng = substream(seed, {7});
  ProblemInstance inst;
  inst.topology = sample_topology(g, rng);
  for (int n = 0; n < attributes; ++n) inst.chains.push_back(AttributeChain::symmetric(n, states, stay));
  for (int n = 0; n < attributes; ++n) inst.schedule.attributes.push_back(n);
  inst.schedule.quorum = 1;
  inst.budget.noise_w = dbm_to_watts(-120);
  inst.values.resize(isas, attributes);
  for (int k = 0; k < isas; ++k)
    for (int j = 0; j < attributes; ++j) inst.values(k, j) = 0.2 + 0.8 * uniform01(rng);
  return inst;
}

inline double bisect(double lo, double hi, auto f) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace testing
