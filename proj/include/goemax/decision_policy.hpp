#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "goemax/core_model.hpp"

namespace goemax {

enum class Scheme { kUniform, kChangeAware, kSemanticsAware };

std::string_view scheme_name(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view name);

// Probability that an observing ISA generates an update in the attribute's
// slot. Result is clamped to [0, 1]; `clamped` (when given) reports whether
// the raw value fell outside that range.
double generation_probability(Scheme scheme, const AttributeChain& chain, double error_prob,
                              bool observes = true, bool* clamped = nullptr);

// Meta-value threshold realising an unconditional speak rate min(beta, alpha).
double threshold_from_alpha(double alpha, double beta, const MetaValueModel& model);

struct ThresholdPolicy {
  // v_th per (k, n), K x N.
  Eigen::MatrixXd threshold;

  double at(int k, int n) const { return threshold(k, n); }
};

inline bool decide_speak(double threshold, bool generated, double value) { return generated && value > threshold; }
inline bool decide_speak(const ThresholdPolicy& policy, int k, int n, bool generated, double value) {
  return decide_speak(policy.at(k, n), generated, value);
}

// Per-ISA acquisition bookkeeping: last state seen (change-aware) and the
// last state decoded at the NMAs (semantics-aware feedback).
class AcquisitionState {
 public:
  AcquisitionState(Scheme scheme, int num_attributes);

  Scheme scheme() const { return scheme_; }
  // Whether an update is generated for attribute n whose true state is now
  // `state`; `previous_state` is the state at the attribute's previous slot.
  bool generates(int n, int state, int previous_state) const;
  void record_decoded(int n, int state) { last_decoded_[n] = state; }
  int last_decoded(int n) const { return last_decoded_[n]; }

 private:
  Scheme scheme_;
  std::vector<int> last_decoded_;
};

}  // namespace goemax
