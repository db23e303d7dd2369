#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "goemax/effectiveness.hpp"
#include "goemax/optimizer.hpp"

namespace goemax {

// What ISA k assumes about its peers' distances to the NMAs.
enum class PeerModel {
  kSampled,  // drawn from the deployment distribution
  kTruth,    // degenerate at the true positions
};

// How a per-NMA decode probability is scored inside the local model.
enum class SuccessSurrogate {
  kChernoffBound,  // Markov/Chernoff upper bound on Pr(SINR > gamma_th)
  kExact,          // exact closed form (phase-type fallback)
};

struct LocalEstimationConfig {
  PeerModel peers = PeerModel::kSampled;
  SuccessSurrogate surrogate = SuccessSurrogate::kChernoffBound;
  int draws = 1000;
  std::uint64_t seed = 1;
  GeometryConfig geometry;  // peer location law
  OptimizerConfig optimizer;
};

// Failure probability seen by ISA k for (own state, correct peers, wrong
// peers); own state 0 silent / not an observer, 1 correct, 2 wrong. Peers are
// exchangeable under the sampled model, so the counts suffice.
class LocalKernelTable {
 public:
  LocalKernelTable(const ProblemInstance& inst, int k, const LocalEstimationConfig& cfg);

  int max_peers() const { return max_peers_; }
  double failure(int own, int correct, int wrong) const;

 private:
  int max_peers_ = 0;
  std::vector<double> table_;
};

// Instance-level model as ISA k sees it.
EffectivenessModel local_model(const ProblemInstance& inst, int k, const LocalEstimationConfig& cfg);

struct LocalEstimate {
  int isa = 0;
  Eigen::VectorXd alpha;  // length N, row k of the local solution
  Solution solution;
};

LocalEstimate estimate_alpha_locally(const ProblemInstance& inst, int k, const LocalEstimationConfig& cfg);

// Rows of every ISA's local estimate stacked into a K x N matrix.
Eigen::MatrixXd estimate_all_locally(const ProblemInstance& inst, const LocalEstimationConfig& cfg);

}  // namespace goemax
