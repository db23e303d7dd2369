#include "goemax/local_estimation.hpp"

#include <algorithm>
#include <cmath>

namespace goemax {

namespace {

double decode_success(const LinkRates& rates, const LinkBudget& budget, SuccessSurrogate s) {
  if (rates.lambda.empty()) return 0.0;
  return s == SuccessSurrogate::kChernoffBound ? chernoff_success_bound(rates, budget)
                                               : success_probability(rates, budget);
}

}  // namespace

LocalKernelTable::LocalKernelTable(const ProblemInstance& inst, int k, const LocalEstimationConfig& cfg) {
  const Topology& topo = inst.topology;
  const int m_count = topo.num_nmas;
  int largest = 0;
  for (const auto& obs : topo.observers) largest = std::max<int>(largest, obs.size());
  max_peers_ = largest;
  const int side = max_peers_ + 1;
  table_.assign(3 * side * side, 1.0);

  const double power = inst.analytic_power_w();
  const LinkBudget& budget = inst.budget;
  Rng rng = substream(cfg.seed, {0x10ca1, static_cast<std::uint64_t>(k)});
  std::normal_distribution<double> offset(0.0, cfg.geometry.horizontal_sd_m);

  // Peer distances for each draw: draws x max_peers x M.
  std::vector<double> peer(static_cast<std::size_t>(cfg.draws) * max_peers_ * m_count);
  for (double& d : peer) d = distance_from_offset(std::abs(offset(rng)), cfg.geometry.height_m);

  std::vector<double> success(m_count);
  LinkRates rates;
  for (int own = 0; own < 3; ++own) {
    for (int c = 0; c <= max_peers_; ++c) {
      for (int w = 0; c + w <= max_peers_; ++w) {
        if (own != 1 && c == 0) {
          table_[(own * side + c) * side + w] = 1.0;
          continue;
        }
        double acc = 0.0;
        for (int r = 0; r < cfg.draws; ++r) {
          const double* base = &peer[static_cast<std::size_t>(r) * max_peers_ * m_count];
          for (int m = 0; m < m_count; ++m) {
            rates.lambda.clear();
            rates.omega.clear();
            if (own == 1) rates.lambda.push_back(budget.lambda(topo.distance(k, m), power));
            if (own == 2) rates.omega.push_back(budget.omega(topo.distance(k, m), power));
            for (int i = 0; i < c; ++i) rates.lambda.push_back(budget.lambda(base[i * m_count + m], power));
            for (int i = c; i < c + w; ++i) rates.omega.push_back(budget.omega(base[i * m_count + m], power));
            success[m] = decode_success(rates, budget, cfg.surrogate);
          }
          acc += quorum_failure(success, inst.schedule.quorum);
        }
        table_[(own * side + c) * side + w] = acc / cfg.draws;
      }
    }
  }
}

double LocalKernelTable::failure(int own, int correct, int wrong) const {
  const int side = max_peers_ + 1;
  return table_.at((own * side + correct) * side + wrong);
}

EffectivenessModel local_model(const ProblemInstance& inst, int k, const LocalEstimationConfig& cfg) {
  std::vector<DeliveryTable> tables;
  if (cfg.peers == PeerModel::kTruth) {
    const double power = inst.analytic_power_w();
    const auto& topo = inst.topology;
    const auto budget = inst.budget;
    const int quorum = inst.schedule.quorum;
    const auto surrogate = cfg.surrogate;
    FailureKernel kernel = [&topo, budget, quorum, power, surrogate](std::span<const int> correct,
                                                                     std::span<const int> wrong) {
      std::vector<double> success(topo.num_nmas);
      LinkRates rates;
      for (int m = 0; m < topo.num_nmas; ++m) {
        rates.lambda.clear();
        rates.omega.clear();
        for (int i : correct) rates.lambda.push_back(budget.lambda(topo.distance(i, m), power));
        for (int i : wrong) rates.omega.push_back(budget.omega(topo.distance(i, m), power));
        success[m] = decode_success(rates, budget, surrogate);
      }
      return quorum_failure(success, quorum);
    };
    for (int n : inst.schedule.attributes)
      tables.push_back(build_delivery_table(n, inst.topology.observers[n], kernel, inst.enumeration_cap));
  } else {
    const LocalKernelTable local(inst, k, cfg);
    FailureKernel kernel = [&local, k](std::span<const int> correct, std::span<const int> wrong) {
      int own = 0, c = 0, w = 0;
      for (int i : correct) {
        if (i == k) own = 1;
        else ++c;
      }
      for (int i : wrong) {
        if (i == k) own = 2;
        else ++w;
      }
      return local.failure(own, c, w);
    };
    for (int n : inst.schedule.attributes)
      tables.push_back(build_delivery_table(n, inst.topology.observers[n], kernel, inst.enumeration_cap));
  }
  return EffectivenessModel(inst, std::move(tables));
}

LocalEstimate estimate_alpha_locally(const ProblemInstance& inst, int k, const LocalEstimationConfig& cfg) {
  if (k < 0 || k >= inst.topology.num_isas) throw Error("ISA index out of range");
  const EffectivenessModel model = local_model(inst, k, cfg);
  LocalEstimate est;
  est.isa = k;
  est.solution = solve_algorithm1(model, cfg.optimizer);
  est.alpha = est.solution.alpha_star.row(k).transpose();
  return est;
}

Eigen::MatrixXd estimate_all_locally(const ProblemInstance& inst, const LocalEstimationConfig& cfg) {
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(inst.topology.num_isas, inst.topology.num_attributes);
  for (int k = 0; k < inst.topology.num_isas; ++k) alpha.row(k) = estimate_alpha_locally(inst, k, cfg).alpha.transpose();
  return alpha;
}

}  // namespace goemax
