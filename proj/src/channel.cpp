#include "goemax/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

#include "goemax/error.hpp"

namespace goemax {

namespace {

constexpr double kCoincidence = 1e-12;
// Largest partial-fraction term magnitude accepted before switching to the
// phase-type evaluation (about 1e-12 absolute error after cancellation).
constexpr double kMaxTerm = 1e4;

void check_distinct(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (std::abs(v[i] - v[j]) <= kCoincidence * std::max(v[i], v[j]))
        throw DegenerateGeometry(std::string("coincident ") + what + " values");
}

struct ClosedFormValue {
  double value;
  double max_term;
};

ClosedFormValue closed_form_terms(const LinkRates& r, const LinkBudget& b) {
  const auto& lam = r.lambda;
  const auto& om = r.omega;
  const double noise_scale = b.snr_threshold * b.noise_w;
  double sum = 0.0, max_term = 0.0;
  for (std::size_t c = 0; c < lam.size(); ++c) {
    // prod_{i != c} Lambda_i / (Lambda_i - Lambda_c)
    double coeff = 1.0;
    for (std::size_t i = 0; i < lam.size(); ++i)
      if (i != c) coeff *= lam[i] / (lam[i] - lam[c]);
    coeff *= std::exp(-lam[c] * noise_scale);
    if (om.empty()) {
      sum += coeff;
      max_term = std::max(max_term, std::abs(coeff));
      continue;
    }
    for (std::size_t j = 0; j < om.size(); ++j) {
      double inner = om[j] / (lam[c] + om[j]);
      for (std::size_t i = 0; i < om.size(); ++i)
        if (i != j) inner *= om[i] / (om[i] - om[j]);
      const double term = coeff * inner;
      sum += term;
      max_term = std::max(max_term, std::abs(term));
    }
  }
  return {sum, max_term};
}

}  // namespace

void LinkBudget::validate() const {
  if (!(path_loss_exponent >= 2.0 && path_loss_exponent < 7.0))
    throw ConfigError("channel.path_loss_exponent", "must lie in [2, 7)");
  if (!(noise_w > 0.0)) throw ConfigError("channel.noise_dbm", "noise power must be positive");
  if (!(snr_threshold > 0.0)) throw ConfigError("channel.gamma_th_db", "threshold must be positive");
}

double LinkBudget::lambda(double distance_m, double power_w) const {
  return std::pow(distance_m, path_loss_exponent) / power_w;
}

LinkRates link_rates(const LinkSets& sets, const LinkBudget& budget, const Topology& topo,
                     std::span<const double> tx_power_w) {
  LinkRates r;
  r.lambda.push_back(budget.lambda(topo.distance(sets.k, sets.m), tx_power_w[sets.k]));
  for (int c : sets.collaborators) {
    if (c == sets.k) continue;
    r.lambda.push_back(budget.lambda(topo.distance(c, sets.m), tx_power_w[c]));
  }
  for (int i : sets.interferers) r.omega.push_back(budget.omega(topo.distance(i, sets.m), tx_power_w[i]));
  return r;
}

double success_probability_closed_form(const LinkRates& rates, const LinkBudget& budget) {
  if (rates.lambda.empty()) return 0.0;
  check_distinct(rates.lambda, "Lambda");
  check_distinct(rates.omega, "Omega");
  return std::clamp(closed_form_terms(rates, budget).value, 0.0, 1.0);
}

double success_probability_closed_form(const LinkSets& sets, const LinkBudget& budget, const Topology& topo,
                                       std::span<const double> tx_power_w) {
  for (int i : sets.interferers)
    if (i == sets.k || std::find(sets.collaborators.begin(), sets.collaborators.end(), i) != sets.collaborators.end())
      throw Error("interferer set overlaps the collaborating set");
  return success_probability_closed_form(link_rates(sets, budget, topo, tx_power_w), budget);
}

double success_probability_phase_type(const LinkRates& rates, const LinkBudget& budget) {
  const int n = static_cast<int>(rates.lambda.size());
  if (n == 0) return 0.0;
  // Sub-generator of the hypoexponential signal is -Q.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    q(i, i) = rates.lambda[i];
    if (i + 1 < n) q(i, i + 1) = -rates.lambda[i];
  }
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (double om : rates.omega) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + q / om;
    v = a.triangularView<Eigen::Upper>().solve(v);
  }
  const double c = budget.snr_threshold * budget.noise_w;
  Eigen::MatrixXd e = (-c * q).exp();
  return std::clamp(e.row(0).dot(v), 0.0, 1.0);
}

double success_probability(const LinkRates& rates, const LinkBudget& budget) {
  if (rates.lambda.empty()) return 0.0;
  try {
    check_distinct(rates.lambda, "Lambda");
    check_distinct(rates.omega, "Omega");
    const auto cf = closed_form_terms(rates, budget);
    if (cf.max_term <= kMaxTerm && std::isfinite(cf.value)) return std::clamp(cf.value, 0.0, 1.0);
  } catch (const DegenerateGeometry&) {
  }
  return success_probability_phase_type(rates, budget);
}

double success_probability_mc(const LinkRates& rates, const LinkBudget& budget, long draws, Rng& rng) {
  if (draws < 1) throw Error("draws must be >= 1");
  std::exponential_distribution<double> fade(1.0);
  long hits = 0;
  for (long d = 0; d < draws; ++d) {
    double signal = 0.0, interference = 0.0;
    for (double l : rates.lambda) signal += fade(rng) / l;
    // Interferer received power has rate Omega * gamma_th.
    for (double o : rates.omega) interference += fade(rng) / (o * budget.snr_threshold);
    if (signal > budget.snr_threshold * (interference + budget.noise_w)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

double success_probability_mc(const LinkSets& sets, const LinkBudget& budget, const Topology& topo,
                              std::span<const double> tx_power_w, long draws, Rng& rng) {
  return success_probability_mc(link_rates(sets, budget, topo, tx_power_w), budget, draws, rng);
}

double chernoff_success_bound(const LinkRates& rates, const LinkBudget& budget) {
  if (rates.lambda.empty()) return 0.0;
  const double cap = *std::min_element(rates.lambda.begin(), rates.lambda.end());
  const double c = budget.snr_threshold * budget.noise_w;
  auto log_bound = [&](double theta) {
    double s = -theta * c;
    for (double l : rates.lambda) s += std::log(l) - std::log(l - theta);
    for (double o : rates.omega) s += std::log(o) - std::log(o + theta);
    return s;
  };
  // log of the bound is convex in theta on (0, min Lambda); golden section.
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = cap * (1.0 - 1e-12);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = log_bound(x1), f2 = log_bound(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * cap; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - g * (hi - lo); f1 = log_bound(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + g * (hi - lo); f2 = log_bound(x2);
    }
  }
  return std::clamp(std::exp(std::min({f1, f2, 0.0})), 0.0, 1.0);
}

double success_probability_upper_bound(std::span<const CollaboratorOutcome> outcomes,
                                       std::span<const double> omega, const LinkBudget& budget) {
  double total = 0.0, weight = 0.0;
  for (const auto& o : outcomes) {
    LinkRates r{o.lambda, std::vector<double>(omega.begin(), omega.end())};
    total += o.weight * chernoff_success_bound(r, budget);
    weight += o.weight;
  }
  if (weight <= 0.0) throw Error("collaborator distribution has no mass");
  return std::clamp(total / weight, 0.0, 1.0);
}

double markov_expression_as_printed(const LinkRates& rates, const LinkBudget& /*budget*/, bool clamp) {
  const auto& lam = rates.lambda;
  const auto& om = rates.omega;
  double prod_l = 1.0, prod_o = 1.0;
  for (double l : lam) prod_l *= l;
  for (double o : om) prod_o *= o;
  double s = 0.0;
  for (double l : lam) {
    const double base = prod_l / (l * l * l);
    if (om.empty()) {
      s += base;
      continue;
    }
    for (double o : om) s += base * prod_o * o / (l + o);
  }
  return clamp ? std::clamp(s, 0.0, 1.0) : s;
}

double quorum_failure(std::span<const double> success, int quorum) {
  // dist[c] = Pr(exactly c successes so far).
  std::vector<double> dist(success.size() + 1, 0.0);
  dist[0] = 1.0;
  for (std::size_t i = 0; i < success.size(); ++i) {
    const double p = success[i];
    for (std::size_t c = i + 1; c > 0; --c) dist[c] = dist[c] * (1.0 - p) + dist[c - 1] * p;
    dist[0] *= (1.0 - p);
  }
  double fail = 0.0;
  for (int c = 0; c < quorum && c < static_cast<int>(dist.size()); ++c) fail += dist[c];
  return std::clamp(fail, 0.0, 1.0);
}

std::vector<int> farthest_nmas(const Topology& topo, int k, int count) {
  std::vector<int> idx(topo.num_nmas);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return topo.distance(k, a) > topo.distance(k, b); });
  idx.resize(std::min(count, topo.num_nmas));
  return idx;
}

}  // namespace goemax
