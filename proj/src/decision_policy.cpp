#include "goemax/decision_policy.hpp"

#include <algorithm>

namespace goemax {

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kUniform: return "uniform";
    case Scheme::kChangeAware: return "change";
    case Scheme::kSemanticsAware: return "semantics";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "uniform") return Scheme::kUniform;
  if (name == "change" || name == "change-aware") return Scheme::kChangeAware;
  if (name == "semantics" || name == "semantics-aware") return Scheme::kSemanticsAware;
  return std::nullopt;
}

double generation_probability(Scheme scheme, const AttributeChain& chain, double error_prob, bool observes,
                              bool* clamped) {
  if (clamped) *clamped = false;
  if (!observes) return 0.0;
  double beta = 1.0;
  switch (scheme) {
    case Scheme::kUniform: beta = 1.0; break;
    case Scheme::kChangeAware: beta = chain.change_prob(); break;
    case Scheme::kSemanticsAware:
      beta = error_prob * (1.0 - chain.states * chain.move_prob) + chain.change_prob();
      break;
  }
  const double out = std::clamp(beta, 0.0, 1.0);
  if (clamped) *clamped = out != beta;
  return out;
}

double threshold_from_alpha(double alpha, double beta, const MetaValueModel& model) {
  if (beta <= 0.0) return 1.0;
  const double rate = std::min(1.0, alpha / beta);
  return meta_value_inverse_cdf(model, 1.0 - rate);
}

AcquisitionState::AcquisitionState(Scheme scheme, int num_attributes)
    : scheme_(scheme), last_decoded_(num_attributes, 0) {}

bool AcquisitionState::generates(int n, int state, int previous_state) const {
  switch (scheme_) {
    case Scheme::kUniform: return true;
    case Scheme::kChangeAware: return state != previous_state;
    case Scheme::kSemanticsAware: return state != last_decoded_[n];
  }
  return true;
}

}  // namespace goemax
