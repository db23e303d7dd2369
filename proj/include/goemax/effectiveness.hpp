#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "goemax/channel.hpp"
#include "goemax/core_model.hpp"
#include "goemax/decision_policy.hpp"

namespace goemax {

// g_r(x) = exp(kappa_r x) - 1, h(x) = c_h x, f_rho(v) = P0 v^3.
struct GoEFunctions {
  double kappa[3] = {1.0, 1.0, 1.0};
  double h_scale = 1.0;
  double power_scale_w = 0.1;
  double w1 = 0.5;

  double w2() const { return 1.0 - w1; }
  double g(int r, double x) const { return std::expm1(kappa[r - 1] * x); }
  double g_inverse(int r, double y) const { return std::log1p(y) / kappa[r - 1]; }
  double g_prime(int r, double x) const { return kappa[r - 1] * std::exp(kappa[r - 1] * x); }
  double g_second(int r, double x) const { return kappa[r - 1] * kappa[r - 1] * std::exp(kappa[r - 1] * x); }
  double h(double x) const { return h_scale * x; }
  double tx_power(double v) const { return power_scale_w * v * v * v; }
  // h(rate * f_rho(v) / v), continuous at v = 0.
  double resource_term(double rate, double v) const;
  void validate() const;
};

// Normalized: exact quorum-failure kernel, no 2^-|K_n| prefactor and the
// two-state error-chain steady state. AsPrinted: farthest-NMA product kernel,
// the 2^-|K_n| prefactor and the printed steady-state expression.
enum class AnalysisMode { kNormalized, kAsPrinted };

struct ProblemInstance {
  Topology topology;
  std::vector<AttributeChain> chains;  // one per attribute, size N
  QuerySchedule schedule;
  LinkBudget budget;
  GoEFunctions functions;
  MetaValueModel meta;
  Scheme scheme = Scheme::kUniform;
  AnalysisMode mode = AnalysisMode::kNormalized;
  double euu_min = 0.1;
  Eigen::MatrixXd values;  // K x |A_t|, meta value v_{k,j} used by the analytics
  int enumeration_cap = 12;

  int num_slots() const { return schedule.size(); }
  void validate() const;
  // Transmit power assumed by the analytics: f_rho at the meta-value mean.
  double analytic_power_w() const { return functions.tx_power(meta.mean()); }
};

// Failure probabilities for every joint state of the observers of one
// attribute. Index digit i (base 3) is the state of observers[i]:
// 0 silent, 1 active with a correct observation, 2 active with a wrong one.
struct DeliveryTable {
  int attribute = 0;
  std::vector<int> observers;
  std::vector<double> failure;

  int size() const { return static_cast<int>(observers.size()); }
};

// Failure kernel for one (T, T') split; `correct`/`wrong` hold ISA indices.
using FailureKernel = std::function<double(std::span<const int> correct, std::span<const int> wrong)>;

DeliveryTable build_delivery_table(int attribute, std::span<const int> observers, const FailureKernel& kernel,
                                   int enumeration_cap);
DeliveryTable build_delivery_table(const ProblemInstance& inst, int attribute);

// Kernel evaluated on the true topology with equal transmit power for all ISAs.
FailureKernel topology_kernel(const Topology& topo, const LinkBudget& budget, int quorum, double power_w,
                              AnalysisMode mode);

// Delivery failure over the activation/observation enumeration; activation
// and accuracy are indexed like table.observers.
double delivery_failure_prob(const DeliveryTable& table, std::span<const double> activation,
                             std::span<const double> accuracy, AnalysisMode mode);

// Coefficients c_j with failure(a) = sum_j c_j a^j (1-a)^(L-j) when all
// observers are active with the same probability a.
std::vector<double> equal_activation_coefficients(const DeliveryTable& table, std::span<const double> accuracy);
double equal_activation_failure(std::span<const double> coefficients, double activation, AnalysisMode mode);

// Steady-state discrepancy error for delivery failure `failure` per
// generated update.
double steady_state_error(const AttributeChain& chain, double failure, AnalysisMode mode = AnalysisMode::kNormalized,
                          Scheme scheme = Scheme::kUniform);

double usefulness_sum_f1(const Eigen::MatrixXd& rate, const Eigen::MatrixXd& values, const QuerySchedule& schedule,
                         const Topology& topo);
double resource_sum_f2(const Eigen::MatrixXd& rate, const Eigen::MatrixXd& values, const QuerySchedule& schedule,
                       const Topology& topo, const GoEFunctions& funcs);

struct AttributeReport {
  int attribute = 0;
  double generation = 1.0;          // beta
  double failure_given_gen = 1.0;   // delivery failure of a generated update
  double failure = 1.0;             // E_n: a generated update is not delivered
  double success = 0.0;             // S_n = 1 - E_n
  double success_others = 1.0;      // product of S over the other queried attributes
  double error = 0.0;               // P_e,n
};

struct FeatureReport {
  double f1 = 0.0;
  double f2 = 0.0;
  double ede = 0.0;
  double erc = 0.0;
  double euu = 0.0;
  double objective = 0.0;   // w1 g1(EDE) + w2 g2(ERC)
  double constraint = 0.0;  // g3(EUU)
  std::vector<AttributeReport> attributes;  // in schedule order

  double success_product() const;
  double error_sum() const;
};

// Analytic effectiveness for one instance; delivery tables are built once.
class EffectivenessModel {
 public:
  explicit EffectivenessModel(ProblemInstance inst);
  EffectivenessModel(ProblemInstance inst, std::vector<DeliveryTable> tables);

  const ProblemInstance& instance() const { return inst_; }
  ProblemInstance& mutable_instance() { return inst_; }
  const DeliveryTable& table(int slot) const { return tables_.at(slot); }

  // alpha is K x N (unconditional transmission probability per ISA/attribute).
  FeatureReport evaluate(const Eigen::MatrixXd& alpha) const;
  AttributeReport analyse_slot(int slot, const Eigen::MatrixXd& alpha) const;
  // Transmission rate min(alpha, beta) actually realised per (k, n).
  Eigen::MatrixXd effective_rate(const Eigen::MatrixXd& alpha, const FeatureReport& report) const;

 private:
  ProblemInstance inst_;
  std::vector<DeliveryTable> tables_;
  // Per slot, coefficients c_j of the failure probability when every observer
  // shares one activation a: sum_j c_j a^j (1 - a)^(L - j).
  std::vector<std::vector<double>> equal_activation_;

  void build_equal_activation();
};

double ede(const EffectivenessModel& model, const Eigen::MatrixXd& alpha);
double erc(const EffectivenessModel& model, const Eigen::MatrixXd& alpha);
double euu(const EffectivenessModel& model, const Eigen::MatrixXd& alpha);

}  // namespace goemax
