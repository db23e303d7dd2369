#include "goemax/core_model.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <numbers>
#include <numeric>
#include <string>

#include "goemax/error.hpp"

namespace goemax {

AttributeChain AttributeChain::symmetric(int index, int states, double stay_prob, int initial_state) {
  AttributeChain c;
  c.index = index;
  c.states = states;
  c.stay_prob = stay_prob;
  c.move_prob = states > 1 ? (1.0 - stay_prob) / (states - 1) : 0.0;
  c.state = initial_state;
  c.validate();
  return c;
}

Eigen::MatrixXd AttributeChain::transition_matrix() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(states, states, move_prob);
  p.diagonal().setConstant(stay_prob);
  return p;
}

void AttributeChain::validate() const {
  if (states < 2) throw ConfigError("states", "attribute " + std::to_string(index) + " needs at least 2 states");
  if (stay_prob < 0.0 || stay_prob > 1.0 || move_prob < 0.0 || move_prob > 1.0)
    throw ConfigError("stay_prob", "attribute " + std::to_string(index) + " has probabilities outside [0,1]");
  if (std::abs(stay_prob + (states - 1) * move_prob - 1.0) > 1e-12)
    throw ConfigError("stay_prob", "attribute " + std::to_string(index) + " rows do not sum to 1");
  if (state < 0 || state >= states) throw ConfigError("state", "initial state out of range");
}

int dtmc_step(AttributeChain& chain, Rng& rng) {
  const double u = uniform01(rng);
  if (u >= chain.stay_prob) {
    // Uniform over the other I_n - 1 states.
    int other = std::uniform_int_distribution<int>(0, chain.states - 2)(rng);
    if (other >= chain.state) ++other;
    chain.state = other;
  }
  return chain.state;
}

bool Topology::observes(int k, int n) const {
  const auto& obs = observers.at(n);
  return std::binary_search(obs.begin(), obs.end(), k);
}

void Topology::validate() const {
  if (num_isas < 1 || num_nmas < 1) throw ConfigError("topology", "need at least one ISA and one NMA");
  if (distance.rows() != num_isas || distance.cols() != num_nmas)
    throw ConfigError("topology.distance", "shape must be K x M");
  if (accuracy.rows() != num_isas || accuracy.cols() != num_attributes)
    throw ConfigError("topology.accuracy", "shape must be K x N");
  if (static_cast<int>(observers.size()) != num_attributes || static_cast<int>(observable.size()) != num_isas)
    throw ConfigError("topology.observers", "observer lists do not match K and N");
  for (int k = 0; k < num_isas; ++k)
    for (int m = 0; m < num_nmas; ++m)
      if (distance(k, m) < height_m) throw ConfigError("topology.distance", "distance below antenna height");
  for (int k = 0; k < num_isas; ++k)
    for (int n = 0; n < num_attributes; ++n) {
      const double q = accuracy(k, n);
      if (q < 0.0 || q > 1.0) throw ConfigError("topology.accuracy", "q outside [0,1]");
      const auto& a = observable[k];
      if (observes(k, n) != std::binary_search(a.begin(), a.end(), n))
        throw ConfigError("topology.observers", "A_k and K_n disagree");
    }
}

Topology Topology::from_observers(Eigen::MatrixXd distance, std::vector<std::vector<int>> observers,
                                  Eigen::MatrixXd accuracy, double height_m) {
  Topology t;
  t.num_isas = static_cast<int>(distance.rows());
  t.num_nmas = static_cast<int>(distance.cols());
  t.num_attributes = static_cast<int>(observers.size());
  t.distance = std::move(distance);
  t.accuracy = std::move(accuracy);
  t.height_m = height_m;
  t.observers = std::move(observers);
  t.observable.assign(t.num_isas, {});
  for (int n = 0; n < t.num_attributes; ++n) {
    std::sort(t.observers[n].begin(), t.observers[n].end());
    for (int k : t.observers[n]) t.observable.at(k).push_back(n);
  }
  return t;
}

double distance_from_offset(double horizontal_m, double height_m) {
  return std::hypot(horizontal_m, height_m);
}

void separate_distances(Eigen::MatrixXd& distance, double jitter_m) {
  const int k_count = static_cast<int>(distance.rows());
  for (int m = 0; m < distance.cols(); ++m) {
    std::vector<int> order(k_count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return distance(a, m) < distance(b, m); });
    for (int i = 1; i < k_count; ++i) {
      const double floor = distance(order[i - 1], m) + jitter_m;
      if (distance(order[i], m) < floor) distance(order[i], m) = floor;
    }
  }
}

Topology sample_topology(const GeometryConfig& cfg, Rng& rng) {
  if (cfg.num_isas < 1 || cfg.num_nmas < 1) throw ConfigError("geometry", "K and M must be >= 1");
  if (cfg.height_m < 0.0) throw ConfigError("geometry.height_m", "must be >= 0");
  if (cfg.jitter_m <= 0.0) throw ConfigError("geometry.jitter_m", "must be > 0");

  std::normal_distribution<double> offset(0.0, cfg.horizontal_sd_m);
  Eigen::MatrixXd d(cfg.num_isas, cfg.num_nmas);
  for (int k = 0; k < cfg.num_isas; ++k)
    for (int m = 0; m < cfg.num_nmas; ++m) d(k, m) = distance_from_offset(std::abs(offset(rng)), cfg.height_m);
  separate_distances(d, cfg.jitter_m);

  std::vector<std::vector<int>> observers(cfg.num_attributes);
  for (int n = 0; n < cfg.num_attributes; ++n) {
    // Resample until at least one ISA observes the attribute.
    do {
      observers[n].clear();
      for (int k = 0; k < cfg.num_isas; ++k)
        if (uniform01(rng) < cfg.observe_prob) observers[n].push_back(k);
    } while (observers[n].empty());
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(cfg.num_isas, cfg.num_attributes, cfg.accuracy);
  return Topology::from_observers(std::move(d), std::move(observers), std::move(q), cfg.height_m);
}

void QuerySchedule::validate(int num_attributes, int num_nmas) const {
  if (static_cast<int>(attributes.size()) > num_attributes)
    throw ConfigError("schedule.attributes", "more queried attributes than N");
  std::vector<int> sorted = attributes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("schedule.attributes", "attributes repeat within an interval");
  for (int n : attributes)
    if (n < 0 || n >= num_attributes) throw ConfigError("schedule.attributes", "attribute index out of range");
  if (quorum < 1 || quorum > num_nmas) throw ConfigError("schedule.quorum", "M_t must lie in [1, M]");
}

double MetaValueModel::cdf(double v) const {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  if (is_beta22()) return v * v * (3.0 - 2.0 * v);
  return boost::math::ibeta(shape_a, shape_b, v);
}

double MetaValueModel::pdf(double v) const {
  if (v < 0.0 || v > 1.0) return 0.0;
  if (is_beta22()) return 6.0 * v * (1.0 - v);
  return boost::math::ibeta_derivative(shape_a, shape_b, v);
}

double MetaValueModel::sample(Rng& rng) const { return meta_value_inverse_cdf(*this, uniform01(rng)); }

double meta_value_inverse_cdf(const MetaValueModel& model, double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  if (model.is_beta22()) {
    // Trigonometric root of 3v^2 - 2v^3 = u on [0, 1].
    return 0.5 + std::cos((std::acos(1.0 - 2.0 * u) + 4.0 * std::numbers::pi) / 3.0);
  }
  // Safeguarded Newton on the monotone CDF.
  double lo = 0.0, hi = 1.0, v = model.mean();
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double f = model.cdf(v) - u;
    if (f > 0.0) hi = v; else lo = v;
    const double dens = model.pdf(v);
    double next = dens > 0.0 ? v - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - v) < 1e-15) break;
    v = next;
  }
  return v;
}

}  // namespace goemax
