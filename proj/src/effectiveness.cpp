#include "goemax/effectiveness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/toms748_solve.hpp>

#include "goemax/error.hpp"

namespace goemax {

double GoEFunctions::resource_term(double rate, double v) const {
  if (v <= 0.0) return h(0.0);
  return h(rate * tx_power(v) / v);
}

void GoEFunctions::validate() const {
  for (double k : kappa)
    if (!(k > 0.0)) throw ConfigError("functions.kappa", "exponential rates must be positive");
  if (!(h_scale > 0.0)) throw ConfigError("functions.h_scale", "must be positive");
  if (!(power_scale_w > 0.0)) throw ConfigError("functions.power_scale_dbm", "must be positive");
  if (!(w1 > 0.0 && w1 < 1.0)) throw ConfigError("functions.w1", "weights must lie strictly inside (0, 1)");
}

void ProblemInstance::validate() const {
  topology.validate();
  if (static_cast<int>(chains.size()) != topology.num_attributes)
    throw ConfigError("chains", "one chain per attribute is required");
  for (const auto& c : chains) c.validate();
  schedule.validate(topology.num_attributes, topology.num_nmas);
  budget.validate();
  functions.validate();
  if (!(euu_min >= 0.0)) throw ConfigError("euu_min", "must be non-negative");
  if (values.rows() != topology.num_isas || values.cols() != schedule.size())
    throw ConfigError("values", "meta-value matrix must be K x |A_t|");
  if ((values.array() < 0.0).any() || (values.array() > 1.0).any())
    throw ConfigError("values", "meta values must lie in [0, 1]");
}

DeliveryTable build_delivery_table(int attribute, std::span<const int> observers, const FailureKernel& kernel,
                                   int enumeration_cap) {
  const int l = static_cast<int>(observers.size());
  if (l > enumeration_cap)
    throw EnumerationTooLarge("attribute " + std::to_string(attribute) + " has " + std::to_string(l) +
                              " observers, cap is " + std::to_string(enumeration_cap));
  DeliveryTable t;
  t.attribute = attribute;
  t.observers.assign(observers.begin(), observers.end());
  int total = 1;
  for (int i = 0; i < l; ++i) total *= 3;
  t.failure.resize(total);
  std::vector<int> correct, wrong;
  for (int idx = 0; idx < total; ++idx) {
    correct.clear();
    wrong.clear();
    int rem = idx;
    for (int i = 0; i < l; ++i, rem /= 3) {
      if (rem % 3 == 1) correct.push_back(observers[i]);
      else if (rem % 3 == 2) wrong.push_back(observers[i]);
    }
    t.failure[idx] = correct.empty() ? 1.0 : kernel(correct, wrong);
  }
  return t;
}

FailureKernel topology_kernel(const Topology& topo, const LinkBudget& budget, int quorum, double power_w,
                              AnalysisMode mode) {
  return [&topo, budget, quorum, power_w, mode](std::span<const int> correct, std::span<const int> wrong) {
    std::vector<double> success(topo.num_nmas);
    LinkRates rates;
    for (int m = 0; m < topo.num_nmas; ++m) {
      rates.lambda.clear();
      rates.omega.clear();
      for (int k : correct) rates.lambda.push_back(budget.lambda(topo.distance(k, m), power_w));
      for (int k : wrong) rates.omega.push_back(budget.omega(topo.distance(k, m), power_w));
      success[m] = success_probability(rates, budget);
    }
    if (mode == AnalysisMode::kNormalized) return quorum_failure(success, quorum);
    double fail = 1.0;
    for (int k : correct)
      for (int m : farthest_nmas(topo, k, quorum + 1)) fail *= 1.0 - success[m];
    return fail;
  };
}

DeliveryTable build_delivery_table(const ProblemInstance& inst, int attribute) {
  const auto kernel = topology_kernel(inst.topology, inst.budget, inst.schedule.quorum, inst.analytic_power_w(),
                                      inst.mode);
  return build_delivery_table(attribute, inst.topology.observers.at(attribute), kernel, inst.enumeration_cap);
}

namespace {

double accumulate_states(const DeliveryTable& t, const std::vector<std::array<double, 3>>& probs, int i, int index,
                         int stride, double weight) {
  if (weight == 0.0) return 0.0;
  if (i == t.size()) return weight * t.failure[index];
  double s = 0.0;
  for (int st = 0; st < 3; ++st)
    s += accumulate_states(t, probs, i + 1, index + st * stride, stride * 3, weight * probs[i][st]);
  return s;
}

}  // namespace

double delivery_failure_prob(const DeliveryTable& table, std::span<const double> activation,
                             std::span<const double> accuracy, AnalysisMode mode) {
  const int l = table.size();
  std::vector<std::array<double, 3>> probs(l);
  for (int i = 0; i < l; ++i) {
    const double a = std::clamp(activation[i], 0.0, 1.0);
    const double q = accuracy[i];
    probs[i] = {1.0 - a, a * q, a * (1.0 - q)};
  }
  double e = accumulate_states(table, probs, 0, 0, 1, 1.0);
  if (mode == AnalysisMode::kAsPrinted) e *= std::ldexp(1.0, -l);
  return std::clamp(e, 0.0, 1.0);
}

std::vector<double> equal_activation_coefficients(const DeliveryTable& table, std::span<const double> accuracy) {
  const int l = table.size();
  std::vector<double> c(l + 1, 0.0);
  const int total = static_cast<int>(table.failure.size());
  for (int idx = 0; idx < total; ++idx) {
    double w = 1.0;
    int active = 0, rem = idx;
    for (int i = 0; i < l; ++i, rem /= 3) {
      const int st = rem % 3;
      if (st == 1) w *= accuracy[i];
      if (st == 2) w *= 1.0 - accuracy[i];
      active += st != 0;
    }
    c[active] += w * table.failure[idx];
  }
  return c;
}

double equal_activation_failure(std::span<const double> coefficients, double activation, AnalysisMode mode) {
  const int l = static_cast<int>(coefficients.size()) - 1;
  const double a = std::clamp(activation, 0.0, 1.0);
  double e = 0.0, pa = 1.0;
  for (int j = 0; j <= l; ++j, pa *= a) e += coefficients[j] * pa * std::pow(1.0 - a, l - j);
  if (mode == AnalysisMode::kAsPrinted) e *= std::ldexp(1.0, -l);
  return std::clamp(e, 0.0, 1.0);
}

double steady_state_error(const AttributeChain& chain, double failure, AnalysisMode mode, Scheme scheme) {
  const double e = std::clamp(failure, 0.0, 1.0);
  const double i_n = chain.states;
  const double p = chain.move_prob;
  if (mode == AnalysisMode::kAsPrinted) {
    const double num = e * (i_n - 1.0) * p;
    const double den = 1.0 + e * (2.0 * (i_n - 1.0) * p - (i_n - 2.0) / (i_n - 1.0) * p - 1.0);
    return den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 1.0;
  }
  // Two-state error chain: 0 -> 1 needs a move and a lost update; 1 -> 1
  // depends on whether the scheme generates while the state is unchanged.
  const double pi01 = e * chain.change_prob();
  const double pi11 = scheme == Scheme::kChangeAware ? chain.stay_prob + (i_n - 2.0) * p * e : e * (1.0 - p);
  const double den = 1.0 + pi01 - pi11;
  if (den <= 1e-300) return 0.0;
  return std::clamp(pi01 / den, 0.0, 1.0);
}

double usefulness_sum_f1(const Eigen::MatrixXd& rate, const Eigen::MatrixXd& values, const QuerySchedule& schedule,
                         const Topology& topo) {
  double s = 0.0;
  for (int j = 0; j < schedule.size(); ++j) {
    const int n = schedule.attributes[j];
    for (int k : topo.observers[n]) s += rate(k, n) * values(k, j);
  }
  return s;
}

double resource_sum_f2(const Eigen::MatrixXd& rate, const Eigen::MatrixXd& values, const QuerySchedule& schedule,
                       const Topology& topo, const GoEFunctions& funcs) {
  double s = 0.0;
  for (int j = 0; j < schedule.size(); ++j) {
    const int n = schedule.attributes[j];
    for (int k : topo.observers[n]) s += funcs.resource_term(rate(k, n), values(k, j));
  }
  return s;
}

double FeatureReport::success_product() const {
  double p = 1.0;
  for (const auto& a : attributes) p *= a.success;
  return p;
}

double FeatureReport::error_sum() const {
  double s = 0.0;
  for (const auto& a : attributes) s += a.error;
  return s;
}

EffectivenessModel::EffectivenessModel(ProblemInstance inst) : inst_(std::move(inst)) {
  inst_.validate();
  for (int j = 0; j < inst_.num_slots(); ++j) tables_.push_back(build_delivery_table(inst_, inst_.schedule.attributes[j]));
  build_equal_activation();
}

void EffectivenessModel::build_equal_activation() {
  equal_activation_.clear();
  for (const auto& t : tables_) {
    std::vector<double> acc(t.size());
    for (int i = 0; i < t.size(); ++i) acc[i] = inst_.topology.accuracy(t.observers[i], t.attribute);
    equal_activation_.push_back(equal_activation_coefficients(t, acc));
  }
}

EffectivenessModel::EffectivenessModel(ProblemInstance inst, std::vector<DeliveryTable> tables)
    : inst_(std::move(inst)), tables_(std::move(tables)) {
  inst_.validate();
  if (static_cast<int>(tables_.size()) != inst_.num_slots()) throw Error("one delivery table per slot is required");
  build_equal_activation();
}

AttributeReport EffectivenessModel::analyse_slot(int slot, const Eigen::MatrixXd& alpha) const {
  const DeliveryTable& table = tables_.at(slot);
  const int n = table.attribute;
  const AttributeChain& chain = inst_.chains.at(n);
  std::vector<double> accuracy(table.size()), activation(table.size());
  for (int i = 0; i < table.size(); ++i) accuracy[i] = inst_.topology.accuracy(table.observers[i], n);

  bool equal = true;
  for (int i = 1; i < table.size(); ++i) equal = equal && alpha(table.observers[i], n) == alpha(table.observers[0], n);

  auto failure_at = [&](double beta) {
    if (equal && table.size() > 0) {
      const double a = beta > 0.0 ? std::min(1.0, alpha(table.observers[0], n) / beta) : 0.0;
      return equal_activation_failure(equal_activation_[slot], a, inst_.mode);
    }
    for (int i = 0; i < table.size(); ++i)
      activation[i] = beta > 0.0 ? std::min(1.0, alpha(table.observers[i], n) / beta) : 0.0;
    return delivery_failure_prob(table, activation, accuracy, inst_.mode);
  };

  AttributeReport r;
  r.attribute = n;
  switch (inst_.scheme) {
    case Scheme::kUniform:
    case Scheme::kChangeAware:
      r.generation = generation_probability(inst_.scheme, chain, 0.0);
      r.failure_given_gen = failure_at(r.generation);
      r.error = steady_state_error(chain, r.failure_given_gen, inst_.mode, inst_.scheme);
      break;
    case Scheme::kSemanticsAware: {
      // beta depends on P_e, which depends on beta through the activation:
      // solve beta = generation(P_e(beta)) on the range generation can take.
      auto gen_of = [&](double beta) {
        const double pe = steady_state_error(chain, failure_at(beta), inst_.mode, inst_.scheme);
        return generation_probability(inst_.scheme, chain, pe);
      };
      const double g0 = generation_probability(inst_.scheme, chain, 0.0);
      const double g1 = generation_probability(inst_.scheme, chain, 1.0);
      double lo = std::min(g0, g1), hi = std::max(g0, g1);
      if (hi - lo < 1e-15) {
        r.generation = lo;
      } else {
        auto resid = [&](double b) { return gen_of(b) - b; };
        const double f_lo = resid(lo), f_hi = resid(hi);
        if (f_lo <= 0.0) {
          r.generation = lo;
        } else if (f_hi >= 0.0) {
          r.generation = hi;
        } else {
          std::uintmax_t iters = 100;
          auto [a, b] = boost::math::tools::toms748_solve(resid, lo, hi, f_lo, f_hi,
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
          r.generation = 0.5 * (a + b);
        }
      }
      r.failure_given_gen = failure_at(r.generation);
      r.error = steady_state_error(chain, r.failure_given_gen, inst_.mode, inst_.scheme);
      break;
    }
  }
  r.failure = r.generation * r.failure_given_gen;
  r.success = 1.0 - r.failure;
  return r;
}

Eigen::MatrixXd EffectivenessModel::effective_rate(const Eigen::MatrixXd& alpha, const FeatureReport& report) const {
  Eigen::MatrixXd rate = Eigen::MatrixXd::Zero(alpha.rows(), alpha.cols());
  for (const auto& a : report.attributes)
    for (int k : inst_.topology.observers[a.attribute]) rate(k, a.attribute) = std::min(alpha(k, a.attribute), a.generation);
  return rate;
}

FeatureReport EffectivenessModel::evaluate(const Eigen::MatrixXd& alpha) const {
  FeatureReport rep;
  for (int j = 0; j < inst_.num_slots(); ++j) rep.attributes.push_back(analyse_slot(j, alpha));
  const double prod = rep.success_product();
  for (auto& a : rep.attributes) {
    double others = 1.0;
    for (const auto& b : rep.attributes)
      if (&b != &a) others *= b.success;
    a.success_others = others;
  }
  const Eigen::MatrixXd rate = effective_rate(alpha, rep);
  rep.f1 = usefulness_sum_f1(rate, inst_.values, inst_.schedule, inst_.topology);
  rep.f2 = resource_sum_f2(rate, inst_.values, inst_.schedule, inst_.topology, inst_.functions);
  rep.ede = rep.f1 * rep.error_sum();
  rep.erc = rep.f2 * prod;
  rep.euu = rep.f1 * prod;
  const auto& fn = inst_.functions;
  rep.objective = fn.w1 * fn.g(1, rep.ede) + fn.w2() * fn.g(2, rep.erc);
  rep.constraint = fn.g(3, rep.euu);
  return rep;
}

double ede(const EffectivenessModel& model, const Eigen::MatrixXd& alpha) { return model.evaluate(alpha).ede; }
double erc(const EffectivenessModel& model, const Eigen::MatrixXd& alpha) { return model.evaluate(alpha).erc; }
double euu(const EffectivenessModel& model, const Eigen::MatrixXd& alpha) { return model.evaluate(alpha).euu; }

}  // namespace goemax
