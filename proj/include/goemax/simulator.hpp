#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "goemax/decision_policy.hpp"
#include "goemax/effectiveness.hpp"

namespace goemax {

enum class PolicyMode {
  kFixedAlpha,  // speak on a generated update with probability activation(k, n)
  kThreshold,   // speak on a generated update iff v > v_th(k, n)
};

enum class PowerMode {
  kMetaValue,  // rho = f_rho(v) per update
  kAnalytic,   // rho = f_rho(mean v) for every update
};

struct SimulationConfig {
  int intervals = 500;
  std::uint64_t seed = 1;
  PolicyMode policy = PolicyMode::kThreshold;
  PowerMode power = PowerMode::kMetaValue;
  Eigen::MatrixXd activation;  // K x N, fixed-alpha mode
  ThresholdPolicy thresholds;  // K x N, threshold mode
  bool record_trace = false;
  int trace_limit = 10000;
  // Forces every NMA to decode whenever a correct codeword is on air.
  bool ideal_channel = false;
};

struct IsaSlot {
  int isa = 0;
  int observed = 0;
  bool generated = false;
  double value = 0.0;
  bool spoke = false;
  double tx_power_w = 0.0;
};

struct SlotTrace {
  int interval = 0;
  int slot = 0;
  int attribute = 0;
  int true_state = 0;
  std::vector<IsaSlot> isas;
  std::vector<double> sinr;  // per NMA, 0 when nothing correct is on air
  std::vector<bool> decoded;
  bool quorum = false;
  int reconstructed = 0;
};

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 95 % normal approximation
};

struct AttributeStats {
  int attribute = 0;
  long slots = 0;
  long triggered = 0;      // slots in which the attribute's update was generated
  long failures = 0;       // generated but not delivered to the quorum
  long errors = 0;         // NMA estimate differs from the truth after the slot
  long observer_slots = 0;
  long generated = 0;
  long spoke = 0;

  double failure_rate() const { return slots ? double(failures) / slots : 0.0; }
  double failure_given_trigger() const { return triggered ? double(failures) / triggered : 0.0; }
  double error_rate() const { return slots ? double(errors) / slots : 0.0; }
  double generation_rate() const { return observer_slots ? double(generated) / observer_slots : 0.0; }
  double speak_rate() const { return observer_slots ? double(spoke) / observer_slots : 0.0; }
};

struct RunReport {
  Scheme scheme = Scheme::kUniform;
  int intervals = 0;
  Estimate ede, erc, euu;
  Estimate objective;  // w1 g1(EDE) + w2 g2(ERC) of the time averages
  double constraint = 0.0;  // g3(EUU) of the time average
  double generation_rate = 0.0;
  double speak_rate = 0.0;
  std::vector<AttributeStats> attributes;  // in schedule order
  std::vector<SlotTrace> trace;
};

// Conditional speak probability min(1, alpha / beta) realising the
// unconditional rate alpha under the model's generation probabilities.
Eigen::MatrixXd activation_from_alpha(const EffectivenessModel& model, const Eigen::MatrixXd& alpha);

// Thresholds v_th = F^-1(1 - min(1, alpha / beta)) per (k, n).
ThresholdPolicy thresholds_from_alpha(const EffectivenessModel& model, const Eigen::MatrixXd& alpha);

RunReport run_simulation(const ProblemInstance& inst, const SimulationConfig& cfg);

struct ThresholdRow {
  Scheme scheme = Scheme::kUniform;
  double v_th = 0.0;
  Estimate objective;
  Estimate euu;
  double alpha_eff = 0.0;
  double constraint = 0.0;  // g3 of the mean EUU
};

// Threshold sweep with the same event randomness for every scheme and grid
// point; each replication r uses seed substream (root_seed, r).
std::vector<ThresholdRow> sweep_threshold(const ProblemInstance& inst, const std::vector<Scheme>& schemes,
                                          const std::vector<double>& grid, int intervals, int replications,
                                          std::uint64_t root_seed);

// Number of sign changes of g3(EUU) - EUU_min along a sweep for one scheme.
int count_constraint_roots(const std::vector<ThresholdRow>& rows, Scheme scheme, double euu_min);

struct StateRow {
  int states = 0;
  int attributes = 0;
  std::optional<double> objective;  // empty when no activation is feasible
  double alpha = 0.0;
};

// Lowest feasible objective over a common activation for each (I_n, |A_t|);
// chains use the base instance's stay probability, the schedule takes the
// first |A_t| attributes.
std::vector<StateRow> sweep_states(const ProblemInstance& base, const std::vector<int>& states,
                                   const std::vector<int>& sizes);

// Tied-activation feasible minimiser by coarse grid plus local refinement.
std::optional<std::pair<double, double>> tied_feasible_minimum(const EffectivenessModel& model);

// CSV writers; the first line is a '#' comment carrying `header_comment`.
void write_threshold_csv(std::ostream& out, const std::vector<ThresholdRow>& rows, const std::string& header_comment);
void write_states_csv(std::ostream& out, const std::vector<StateRow>& rows, const std::string& header_comment);

}  // namespace goemax
