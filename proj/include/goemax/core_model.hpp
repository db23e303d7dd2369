#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "goemax/random.hpp"

namespace goemax {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Symmetric DTMC of one attribute: stay with stay_prob, move to each of the
// other states with move_prob. States are 0-based.
struct AttributeChain {
  int index = 0;
  int states = 2;
  double stay_prob = 0.5;
  double move_prob = 0.5;
  int state = 0;

  static AttributeChain symmetric(int index, int states, double stay_prob, int initial_state = 0);

  // Probability that one step leaves the current state, (I_n - 1) p_n.
  double change_prob() const { return (states - 1) * move_prob; }
  Eigen::MatrixXd transition_matrix() const;
  void validate() const;
};

int dtmc_step(AttributeChain& chain, Rng& rng);

struct GeometryConfig {
  int num_isas = 10;
  int num_nmas = 4;
  int num_attributes = 10;
  double height_m = 7.0;
  double horizontal_sd_m = 60.0;
  double jitter_m = 1e-6;
  double observe_prob = 0.7;
  double accuracy = 0.8;
};

struct Topology {
  int num_isas = 0;
  int num_nmas = 0;
  int num_attributes = 0;
  Eigen::MatrixXd distance;                  // K x M, metres
  std::vector<std::vector<int>> observable;  // A_k, ascending attribute index
  std::vector<std::vector<int>> observers;   // K_n, ascending ISA index
  Eigen::MatrixXd accuracy;                  // K x N, q_{k,n}
  double height_m = 0.0;

  bool observes(int k, int n) const;
  void validate() const;

  // Builds A_k from K_n; all other fields are taken verbatim.
  static Topology from_observers(Eigen::MatrixXd distance, std::vector<std::vector<int>> observers,
                                 Eigen::MatrixXd accuracy, double height_m);
};

double distance_from_offset(double horizontal_m, double height_m);

// Pushes apart distances to the same NMA that are closer than jitter_m.
void separate_distances(Eigen::MatrixXd& distance, double jitter_m);

Topology sample_topology(const GeometryConfig& cfg, Rng& rng);

// Ordered attribute list queried in one service interval plus the decode quorum.
struct QuerySchedule {
  std::vector<int> attributes;
  int quorum = 1;

  int size() const { return static_cast<int>(attributes.size()); }
  void validate(int num_attributes, int num_nmas) const;
};

// Beta(shape_a, shape_b) meta-value law.
struct MetaValueModel {
  double shape_a = 2.0;
  double shape_b = 2.0;

  double cdf(double v) const;
  double pdf(double v) const;
  double mean() const { return shape_a / (shape_a + shape_b); }
  double sample(Rng& rng) const;
  bool is_beta22() const { return shape_a == 2.0 && shape_b == 2.0; }
};

double meta_value_inverse_cdf(const MetaValueModel& model, double u);

}  // namespace goemax
