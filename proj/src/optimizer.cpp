#include "goemax/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>

#include <boost/math/tools/toms748_solve.hpp>

namespace goemax {

AlphaLayout::AlphaLayout(const ProblemInstance& inst, AlphaTying tying)
    : tying_(tying), rows_(inst.topology.num_isas), cols_(inst.topology.num_attributes) {
  const auto& sched = inst.schedule;
  const auto& obs = inst.topology.observers;
  if (tying == AlphaTying::kTied) {
    groups_.emplace_back();
    slots_.emplace_back();
  }
  for (int j = 0; j < sched.size(); ++j) {
    const int n = sched.attributes[j];
    switch (tying) {
      case AlphaTying::kFull:
        for (int k : obs[n]) {
          groups_.push_back({{k, n}});
          slots_.push_back({j});
        }
        break;
      case AlphaTying::kPerAttribute:
        groups_.emplace_back();
        for (int k : obs[n]) groups_.back().push_back({k, n});
        slots_.push_back({j});
        break;
      case AlphaTying::kTied:
        for (int k : obs[n]) groups_[0].push_back({k, n});
        slots_[0].push_back(j);
        break;
    }
  }
}

Eigen::MatrixXd AlphaLayout::expand(const Eigen::VectorXd& theta) const {
  // Tied: every cell, observed or not, carries the common value.
  if (tying_ == AlphaTying::kTied) return Eigen::MatrixXd::Constant(rows_, cols_, theta(0));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int i = 0; i < dimension(); ++i)
    for (auto [k, n] : groups_[i]) a(k, n) = theta(i);
  return a;
}

Eigen::VectorXd AlphaLayout::compress(const Eigen::MatrixXd& alpha) const {
  Eigen::VectorXd t(dimension());
  for (int i = 0; i < dimension(); ++i) {
    double s = 0.0;
    for (auto [k, n] : groups_[i]) s += alpha(k, n);
    t(i) = groups_[i].empty() ? 0.0 : s / groups_[i].size();
  }
  return t;
}

void OptimizerConfig::validate() const {
  if (!(alpha_tol > 0.0) || !(weight_tol > 0.0)) throw ConfigError("optimizer.tolerance", "must be positive");
  if (max_inner < 1 || max_outer < 1) throw ConfigError("optimizer.iterations", "must be at least 1");
  if (!(eta_first > 0.0) || !(eta_growth > 1.0)) throw ConfigError("optimizer.eta", "bad multiplier schedule");
  if (!(fd_step > 0.0)) throw ConfigError("optimizer.fd_step", "must be positive");
}

double target_error_probability(const EffectivenessModel& model, const FeatureReport& current, int slot, double eta,
                                double w1, bool* clamped) {
  if (clamped) *clamped = false;
  if (eta == 0.0) return 0.0;
  const auto& fn = model.instance().functions;
  const auto& attrs = current.attributes;
  double others = 0.0;
  for (int j = 0; j < static_cast<int>(attrs.size()); ++j)
    if (j != slot) others += attrs[j].error;
  // A single queried attribute has no "other" errors to share the budget.
  if (attrs.size() == 1) others = attrs[0].error;
  const double den = current.f1 * others;
  if (!(den > 0.0)) throw InfeasibleTarget("error-target denominator is not positive");
  const double prod = attrs[slot].success * attrs[slot].success_others;
  const double bracket = fn.g_inverse(1, eta * prod * model.instance().euu_min / (2.0 * w1)) / den;
  if (bracket < 0.0) throw InfeasibleTarget("error-target bracket is negative");
  const double t = std::sqrt(bracket);
  if (clamped) *clamped = t > 1.0;
  return std::min(t, 1.0);
}

namespace {

double slot_error_sum(const EffectivenessModel& model, const AlphaLayout& layout, const Eigen::VectorXd& theta,
                      int param) {
  const Eigen::MatrixXd a = layout.expand(theta);
  double s = 0.0;
  for (int j : layout.slots(param)) s += model.analyse_slot(j, a).error;
  return s;
}

}  // namespace

Inversion invert_error_for_alpha(const EffectivenessModel& model, const AlphaLayout& layout,
                                 const Eigen::VectorXd& theta, int param, double target, double tol) {
  Eigen::VectorXd t = theta;
  auto phi = [&](double x) {
    t(param) = x;
    return slot_error_sum(model, layout, t, param) - target;
  };
  const double at0 = phi(0.0);
  if (at0 <= 0.0) return {0.0, at0 < -tol};
  // Coarse scan for the first sign change, then bisection.
  constexpr int kScan = 16;
  double lo = 0.0, hi = -1.0;
  for (int i = 1; i <= kScan; ++i) {
    const double x = static_cast<double>(i) / kScan;
    if (phi(x) <= 0.0) {
      hi = x;
      break;
    }
    lo = x;
  }
  if (hi < 0.0) return {1.0, true};
  const double f_lo = phi(lo), f_hi = phi(hi);
  if (f_hi == 0.0) return {hi, false};
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(phi, lo, hi, f_lo, f_hi,
                                                  boost::math::tools::eps_tolerance<double>(48), iters);
  return {0.5 * (a + b), false};
}

LagrangianGradient lagrangian_gradient(const EffectivenessModel& model, const AlphaLayout& layout,
                                       const Eigen::VectorXd& theta, double rel_step, int side) {
  const auto& fn = model.instance().functions;
  const int d = layout.dimension();
  LagrangianGradient g{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  for (int i = 0; i < d; ++i) {
    const double h = rel_step * std::max(theta(i), 1e-2);
    double xp = std::min(1.0, theta(i) + h);
    double xm = std::max(0.0, theta(i) - h);
    if (side < 0 && theta(i) - h >= 0.0) xp = theta(i);
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) = xp;
    tm(i) = xm;
    const FeatureReport rp = model.evaluate(layout.expand(tp));
    const FeatureReport rm = model.evaluate(layout.expand(tm));
    const double span = xp - xm;
    g.ede_part(i) = (fn.g(1, rp.ede) - fn.g(1, rm.ede)) / span;
    g.erc_part(i) = (fn.g(2, rp.erc) - fn.g(2, rm.erc)) / span;
    g.euu_part(i) = (fn.g(3, rp.euu) - fn.g(3, rm.euu)) / span;
  }
  return g;
}

namespace {

struct Stationarity {
  double w1 = 0.5;
  double residual = 0.0;
};

// Least-squares w1 for  w1 A + (1 - w1) B - eta C = 0, then the relative
// max-norm residual at that w1.
Stationarity fit_weights(const LagrangianGradient& g, double eta) {
  const Eigen::VectorXd u = g.ede_part - g.erc_part;
  const Eigen::VectorXd v = g.erc_part - eta * g.euu_part;
  double w1 = 0.5;
  const double uu = u.squaredNorm();
  if (uu > 0.0) w1 = -u.dot(v) / uu;
  constexpr double kEdge = 1e-9;
  w1 = std::clamp(w1, kEdge, 1.0 - kEdge);
  const Eigen::VectorXd r = w1 * g.ede_part + (1.0 - w1) * g.erc_part - eta * g.euu_part;
  const Eigen::VectorXd scale =
      (w1 * g.ede_part).cwiseAbs() + ((1.0 - w1) * g.erc_part).cwiseAbs() + (eta * g.euu_part).cwiseAbs();
  double res = 0.0;
  for (int i = 0; i < r.size(); ++i)
    if (scale(i) > 0.0) res = std::max(res, std::abs(r(i)) / scale(i));
  return {w1, res};
}

struct InnerResult {
  Eigen::VectorXd theta;
  FeatureReport report;
  int iterations = 0;
  bool converged = false;
  bool boundary = false;
  bool clamped = false;
};

InnerResult inner_loop(const EffectivenessModel& model, const AlphaLayout& layout, Eigen::VectorXd theta, double eta,
                       double w1, const OptimizerConfig& cfg) {
  InnerResult out;
  for (int it = 0; it < cfg.max_inner; ++it) {
    const Eigen::VectorXd before = theta;
    out.boundary = false;
    // Plain Gauss-Seidel sweeps; under-relaxed once they fail to settle.
    const double relax = it < 20 ? 1.0 : 0.5;
    for (int i = 0; i < layout.dimension(); ++i) {
      const FeatureReport rep = model.evaluate(layout.expand(theta));
      double target = 0.0;
      try {
        for (int j : layout.slots(i)) {
          bool c = false;
          target += target_error_probability(model, rep, j, eta, w1, &c);
          out.clamped = out.clamped || c;
        }
      } catch (const InfeasibleTarget&) {
        continue;  // no usable target at this iterate; keep the coordinate
      }
      const Inversion inv = invert_error_for_alpha(model, layout, theta, i, target, cfg.invert_tol);
      theta(i) += relax * (inv.value - theta(i));
      out.boundary = out.boundary || inv.at_boundary;
    }
    out.iterations = it + 1;
    if ((theta - before).cwiseAbs().maxCoeff() <= cfg.alpha_tol) {
      out.converged = true;
      break;
    }
  }
  out.theta = theta;
  out.report = model.evaluate(layout.expand(theta));
  return out;
}

struct Refined {
  Eigen::VectorXd theta;
  FeatureReport report;
  int steps = 0;
};

// Feasible-direction descent of the objective on {g3(EUU) >= EUU_min} in the
// box [0,1]^d: move along the projected negative gradient, restore
// feasibility along the constraint gradient, accept on strict decrease.
Refined refine_on_constraint(const EffectivenessModel& model, const AlphaLayout& layout, Eigen::VectorXd theta,
                             const OptimizerConfig& cfg) {
  const double euu_min = model.instance().euu_min;
  const int d = layout.dimension();
  auto eval = [&](const Eigen::VectorXd& t) { return model.evaluate(layout.expand(t)); };
  auto clip = [](const Eigen::VectorXd& t) -> Eigen::VectorXd { return t.cwiseMax(0.0).cwiseMin(1.0); };

  // Moves t0 along g until the constraint holds, landing on its boundary.
  auto restore = [&](const Eigen::VectorXd& t0, const Eigen::VectorXd& g, Refined* out) {
    FeatureReport r = eval(t0);
    if (r.constraint >= euu_min) {
      out->theta = t0;
      out->report = std::move(r);
      return true;
    }
    if (g.cwiseAbs().maxCoeff() == 0.0) return false;
    double lo = 0.0, hi = 1e-3;
    for (;; lo = hi, hi *= 2.0) {
      if (hi > 2.0) return false;
      r = eval(clip(t0 + hi * g));
      if (r.constraint >= euu_min) break;
    }
    for (int i = 0; i < 80 && r.constraint - euu_min > 1e-3 * cfg.constraint_tol; ++i) {
      const double mid = 0.5 * (lo + hi);
      FeatureReport m = eval(clip(t0 + mid * g));
      if (m.constraint >= euu_min) {
        hi = mid;
        r = std::move(m);
      } else {
        lo = mid;
      }
    }
    out->theta = clip(t0 + hi * g);
    out->report = std::move(r);
    return true;
  };

  Refined res{theta, eval(theta), 0};
  double s = 0.1;
  for (int it = 0; it < 20 * cfg.max_inner; ++it) {
    bool moved = false;
    for (int side : {0, -1}) {
      const LagrangianGradient g = lagrangian_gradient(model, layout, res.theta, cfg.fd_step, side);
      const double w1 = model.instance().functions.w1;
      const Eigen::VectorXd grad = w1 * g.ede_part + (1.0 - w1) * g.erc_part;
      const bool active = res.report.constraint - euu_min <= cfg.constraint_tol;
      // Coordinates on a box face that descent would cross are frozen.
      Eigen::VectorXd dir = -grad, cg = g.euu_part;
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd gr = grad;
        cg = g.euu_part;
        for (int i = 0; i < d; ++i) {
          const bool stuck = (res.theta(i) >= 1.0 && dir(i) > 0.0) || (res.theta(i) <= 0.0 && dir(i) < 0.0);
          if (stuck) gr(i) = cg(i) = 0.0;
        }
        dir = -gr;
        if (active && cg.squaredNorm() > 0.0) dir += (gr.dot(cg) / cg.squaredNorm()) * cg;
      }
      const double dn = dir.cwiseAbs().maxCoeff();
      if (!(dn > 0.0)) continue;
      dir /= dn;
      if (cg.cwiseAbs().maxCoeff() > 0.0) cg /= cg.cwiseAbs().maxCoeff();

      for (double step = side == 0 ? s : 0.1; step > 1e-10; step *= 0.5) {
        Refined trial;
        if (!restore(clip(res.theta + step * dir), cg, &trial)) continue;
        if (trial.report.objective < res.report.objective * (1.0 - 1e-14)) {
          trial.steps = res.steps + 1;
          res = std::move(trial);
          moved = true;
          s = std::min(0.2, 2.0 * step);
          break;
        }
      }
      if (moved) break;
    }
    if (!moved) break;
  }
  return res;
}

}  // namespace

Solution solve_algorithm1(const EffectivenessModel& input, const OptimizerConfig& cfg) {
  constexpr int kMaxStalled = 5;
  cfg.validate();
  EffectivenessModel model = input;
  const AlphaLayout layout(model.instance(), cfg.tying);
  const double euu_min = model.instance().euu_min;

  double w1 = model.instance().functions.w1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(layout.dimension());
  int inner_total = 0, outer = 0;

  auto feasible = [&](const FeatureReport& r) { return r.constraint >= euu_min; };

  // Multiplier schedule 0, 0.1, x1.5, ... until the constraint switches from
  // satisfied to violated; the inner loop is warm-started along the way.
  double eta = 0.0, eta_ok = -1.0, eta_bad = -1.0;
  InnerResult ok_state, cur;
  Eigen::VectorXd theta_ok = theta;
  double w1_ok = w1;
  bool all_inner_converged = true;
  int stalled = 0;
  for (; outer < cfg.max_outer; ++outer) {
    cur = inner_loop(model, layout, theta, eta, w1, cfg);
    inner_total += cur.iterations;
    all_inner_converged = all_inner_converged && cur.converged;
    stalled = cur.converged ? 0 : stalled + 1;
    theta = cur.theta;
    if (feasible(cur.report)) {
      eta_ok = eta;
      ok_state = cur;
      theta_ok = theta;
      w1_ok = w1;
      if (std::abs(cur.report.constraint - euu_min) <= 0.1 * cfg.constraint_tol) break;
      if (stalled >= kMaxStalled) break;  // the fixed point is cycling; refine from here
    } else if (eta_ok >= 0.0) {
      eta_bad = eta;
      break;
    } else {
      break;  // infeasible even at the largest activation
    }
    const double w_new = fit_weights(lagrangian_gradient(model, layout, theta, cfg.fd_step), eta).w1;
    if (eta > 0.0 && std::abs(w_new - w1) > cfg.weight_tol) w1 = w_new;
    eta = eta == 0.0 ? cfg.eta_first : eta * cfg.eta_growth;
  }

  Solution sol;
  if (eta_ok < 0.0) {
    sol.alpha_star = layout.expand(theta);
    sol.features = cur.report;
    sol.w1 = w1;
    sol.w2 = 1.0 - w1;
    sol.constraint_gap = std::abs(cur.report.constraint - euu_min);
    sol.outer_iterations = outer + 1;
    sol.inner_iterations = inner_total;
    throw NotConverged("constraint cannot be met at any activation", sol);
  }

  // Refine the multiplier between the last feasible and first infeasible value.
  if (eta_bad > 0.0) {
    double lo = eta_ok, hi = eta_bad;
    Eigen::VectorXd th = theta_ok;
    for (int it = 0; it < cfg.eta_bisection_iters; ++it) {
      const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
      InnerResult r = inner_loop(model, layout, th, mid, w1_ok, cfg);
      inner_total += r.iterations;
      if (feasible(r.report)) {
        lo = mid;
        ok_state = r;
        th = r.theta;
      } else {
        hi = mid;
      }
      if (std::abs(ok_state.report.constraint - euu_min) <= 0.1 * cfg.constraint_tol || hi / lo - 1.0 < 1e-15)
        break;
    }
    eta_ok = lo;
    w1 = w1_ok;
  }
  cur = ok_state;
  theta = cur.theta;

  auto& fn = model.mutable_instance().functions;
  // Scale of h satisfying g2(ERC) = g1(EDE) at a given point.
  auto calibrate = [&](const FeatureReport& r) {
    if (!cfg.calibrate_resource_scale || !(r.erc > 0.0)) return fn.h_scale;
    return fn.g_inverse(2, fn.g(1, r.ede)) / (r.erc / fn.h_scale);
  };
  fn.h_scale = calibrate(cur.report);
  fn.w1 = fit_weights(lagrangian_gradient(model, layout, theta, cfg.fd_step), eta_ok).w1;

  // Activation above the generation probability changes nothing; pull such
  // coordinates down to it so the descent sees a nonzero gradient.
  for (int i = 0; i < layout.dimension(); ++i) {
    double beta = 0.0;
    for (int j : layout.slots(i)) beta = std::max(beta, cur.report.attributes[j].generation);
    theta(i) = std::min(theta(i), beta);
  }

  // The printed fixed point equalises error targets but is not stationary in
  // general, and the kink at alpha = beta can trap a local descent. Descend
  // along the constraint (W held fixed) from the printed point and from the
  // diagonal alpha = t * 1, keeping the best.
  std::vector<Eigen::VectorXd> starts{theta};
  {
    const int d = layout.dimension();
    auto diag = [&](double t) { return model.evaluate(layout.expand(Eigen::VectorXd::Constant(d, t))); };
    double best_t = -1.0, best_obj = std::numeric_limits<double>::infinity();
    constexpr int kDiag = 20;
    double first_ok = -1.0, last_bad = 0.0;
    for (int i = 0; i <= kDiag; ++i) {
      const double t = static_cast<double>(i) / kDiag;
      const FeatureReport r = diag(t);
      if (r.constraint < euu_min) {
        if (first_ok < 0.0) last_bad = t;
        continue;
      }
      if (first_ok < 0.0) first_ok = t;
      if (r.objective < best_obj) {
        best_obj = r.objective;
        best_t = t;
      }
    }
    if (best_t >= 0.0) starts.push_back(Eigen::VectorXd::Constant(d, best_t));
    if (first_ok > 0.0) {
      double lo = last_bad, hi = first_ok;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (diag(mid).constraint >= euu_min ? hi : lo) = mid;
      }
      starts.push_back(Eigen::VectorXd::Constant(d, hi));
    }
  }
  Refined ref{theta, model.evaluate(layout.expand(theta)), 0};
  ref.report.objective = std::numeric_limits<double>::infinity();
  for (const auto& st : starts) {
    Refined r = refine_on_constraint(model, layout, st, cfg);
    if (r.report.constraint >= euu_min && r.report.objective < ref.report.objective) ref = std::move(r);
  }
  if (!std::isfinite(ref.report.objective)) ref = {theta, model.evaluate(layout.expand(theta)), 0};
  for (int round = 0; round < 20; ++round) {
    ref = refine_on_constraint(model, layout, ref.theta, cfg);
    const double ch = calibrate(ref.report);
    const bool stable = std::abs(ch - fn.h_scale) <= 1e-9 * fn.h_scale;
    fn.h_scale = ch;
    ref.report = model.evaluate(layout.expand(ref.theta));
    if (stable) break;
  }
  theta = ref.theta;
  const Eigen::MatrixXd alpha = layout.expand(theta);

  // Multiplier from stationarity at the final point.
  const LagrangianGradient grad = lagrangian_gradient(model, layout, theta, cfg.fd_step);
  const Eigen::VectorXd cost = fn.w1 * grad.ede_part + fn.w2() * grad.erc_part;
  // Coordinates pinned at a box face are excluded from the multiplier fit and
  // only need the sign that keeps them there.
  std::vector<int> free_idx;
  for (int i = 0; i < theta.size(); ++i)
    if (theta(i) > 0.0 && theta(i) < 1.0) free_idx.push_back(i);
  const bool active = ref.report.constraint - euu_min <= cfg.constraint_tol;
  double eta_star = 0.0;
  if (active) {
    double num = 0.0, den = 0.0;
    for (int i : free_idx) {
      num += cost(i) * grad.euu_part(i);
      den += grad.euu_part(i) * grad.euu_part(i);
    }
    if (den > 0.0) eta_star = std::max(0.0, num / den);
  }
  double residual = 0.0;
  {
    const Eigen::VectorXd r = cost - eta_star * grad.euu_part;
    const Eigen::VectorXd scale = (fn.w1 * grad.ede_part).cwiseAbs() + (fn.w2() * grad.erc_part).cwiseAbs() +
                                  (eta_star * grad.euu_part).cwiseAbs();
    for (int i = 0; i < r.size(); ++i) {
      const bool upper = theta(i) >= 1.0 && r(i) <= 0.0;
      const bool lower = theta(i) <= 0.0 && r(i) >= 0.0;
      if (scale(i) > 0.0 && !upper && !lower) residual = std::max(residual, std::abs(r(i)) / scale(i));
    }
  }

  sol.alpha_star = alpha;
  sol.w1 = fn.w1;
  sol.w2 = fn.w2();
  sol.eta = eta_star;
  sol.h_scale = fn.h_scale;
  sol.kkt_residual = residual;
  sol.features = ref.report;
  sol.constraint_gap = std::abs(ref.report.constraint - euu_min);
  sol.boundary_alpha = cur.boundary;
  sol.target_clamped = cur.clamped;
  sol.inner_iterations = inner_total + ref.steps;
  sol.outer_iterations = outer + 1;
  {
    const double prod = ref.report.success_product();
    const double f2_pred = prod > 0.0 ? fn.g_inverse(2, fn.g(1, ref.report.ede)) / prod : 0.0;
    sol.eq14_relative_error = ref.report.f2 > 0.0 ? std::abs(f2_pred - ref.report.f2) / ref.report.f2 : 0.0;
  }
  sol.convexity = convexity_conditions(model, layout, alpha, sol.w1, sol.eta, cfg.fd_step * 10.0);
  sol.printed_loop_converged = all_inner_converged;
  sol.constraint_active = active;
  sol.converged = residual <= 1e-2;
  return sol;
}

namespace {

struct SlotQuantities {
  double f1, f2, pe, s, s_others;
};

SlotQuantities slot_quantities(const EffectivenessModel& model, const Eigen::MatrixXd& alpha, int slot) {
  const FeatureReport r = model.evaluate(alpha);
  const auto& a = r.attributes[slot];
  return {r.f1, r.f2, a.error, a.success, a.success_others};
}

}  // namespace

ConvexityReport convexity_conditions(const EffectivenessModel& model, const AlphaLayout& layout,
                                     const Eigen::MatrixXd& alpha, double w1, double eta, double delta) {
  ConvexityReport rep;
  rep.h4_slack = rep.h5_slack = rep.h6_slack = std::numeric_limits<double>::infinity();
  const auto& fn = model.instance().functions;
  const Eigen::VectorXd theta = layout.compress(alpha);

  for (int i = 0; i < layout.dimension(); ++i) {
    // Keep the stencil inside [0, 1].
    const double c = std::clamp(theta(i), delta, 1.0 - delta);
    auto at = [&](double x, int slot) {
      Eigen::VectorXd t = theta;
      t(i) = x;
      return slot_quantities(model, layout.expand(t), slot);
    };
    for (int j : layout.slots(i)) {
      auto diffs = [&](double h) {
        const SlotQuantities p = at(c + h, j), m = at(c - h, j), z = at(c, j);
        struct D {
          SlotQuantities z, d1, d2;
        } d{z,
            {(p.f1 - m.f1) / (2 * h), (p.f2 - m.f2) / (2 * h), (p.pe - m.pe) / (2 * h), (p.s - m.s) / (2 * h), 0.0},
            {(p.f1 - 2 * z.f1 + m.f1) / (h * h), (p.f2 - 2 * z.f2 + m.f2) / (h * h),
             (p.pe - 2 * z.pe + m.pe) / (h * h), 0.0, 0.0}};
        return d;
      };
      const auto d = diffs(delta);
      const auto d_half = diffs(0.5 * delta);
      rep.richardson_gap = std::max({rep.richardson_gap, std::abs(d.d1.f1 - d_half.d1.f1),
                                     std::abs(d.d1.f2 - d_half.d1.f2), std::abs(d.d1.pe - d_half.d1.pe),
                                     std::abs(d.d1.s - d_half.d1.s)});
      const auto& z = d.z;
      const double h4 = d.d1.f1 * d.d1.pe + 0.5 * z.f1 * d.d2.pe;
      const double h5 = d.d1.s * d.d1.f2 + 0.5 * z.s * d.d2.f2;
      const double lhs = eta * (z.f1 * d.d1.s + z.s * d.d1.f1) * fn.g_second(3, z.f1 * z.s * z.s_others);
      const double rhs = (1.0 - w1) * (z.f2 * d.d1.s + z.s * d.d1.f2) * fn.g_second(2, z.f2 * z.s * z.s_others);
      rep.h4_slack = std::min(rep.h4_slack, h4);
      rep.h5_slack = std::min(rep.h5_slack, h5);
      rep.h6_slack = std::min(rep.h6_slack, rhs - lhs);
    }
  }
  if (!std::isfinite(rep.h4_slack)) rep.h4_slack = rep.h5_slack = rep.h6_slack = 0.0;
  // Slack within finite-difference noise counts as satisfied.
  constexpr double kNoise = -1e-9;
  rep.h4 = rep.h4_slack >= kNoise;
  rep.h5 = rep.h5_slack >= kNoise;
  rep.h6 = rep.h6_slack >= kNoise;
  return rep;
}

double large_state_alpha(const EffectivenessModel& model, int k, int slot, const Eigen::MatrixXd& alpha, double eta,
                         double w1) {
  const auto& inst = model.instance();
  const int n = inst.schedule.attributes.at(slot);
  const FeatureReport rep = model.evaluate(alpha);
  const double beta = rep.attributes[slot].generation;
  Eigen::MatrixXd on = alpha, off = alpha;
  on(k, n) = beta;
  off(k, n) = 0.0;
  const double e_on = model.analyse_slot(slot, on).failure;
  const double e_off = model.analyse_slot(slot, off).failure;
  if (std::abs(e_on - e_off) <= 1e-12) throw DegenerateSplit("ISA activation does not change the delivery failure");
  const double scale = eta * rep.attributes[slot].success_others * inst.euu_min;
  const double cost = 2.0 * w1 * inst.functions.g(1, rep.f1 / std::ldexp(1.0, inst.num_slots() + 1));
  const double a = (scale * (1.0 - e_off) - cost) / (scale * (e_on - e_off));
  return std::clamp(a, 0.0, 1.0) * beta;
}

GridResult grid_search_oracle(const EffectivenessModel& model, const AlphaLayout& layout, double grid_step,
                              long max_points) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw Error("grid step must lie in (0, 1]");
  const int per_axis = static_cast<int>(std::lround(1.0 / grid_step)) + 1;
  const int d = layout.dimension();
  double total = std::pow(static_cast<double>(per_axis), d);
  if (total > static_cast<double>(max_points))
    throw GridTooLarge("grid of " + std::to_string(total) + " points exceeds " + std::to_string(max_points));
  const double euu_min = model.instance().euu_min;

  GridResult res;
  res.objective = std::numeric_limits<double>::infinity();
  res.feasible_lo = 1.0;
  res.feasible_hi = 0.0;
  std::vector<int> idx(d, 0);
  Eigen::VectorXd theta(d);
  const long count = static_cast<long>(total);
  for (long p = 0; p < count; ++p) {
    for (int i = 0; i < d; ++i) theta(i) = std::min(1.0, idx[i] * grid_step);
    const Eigen::MatrixXd a = layout.expand(theta);
    const FeatureReport r = model.evaluate(a);
    ++res.points;
    if (r.constraint >= euu_min) {
      ++res.feasible_points;
      if (d == 1) {
        res.feasible_lo = std::min(res.feasible_lo, theta(0));
        res.feasible_hi = std::max(res.feasible_hi, theta(0));
      }
      if (r.objective < res.objective) {
        res.feasible = true;
        res.objective = r.objective;
        res.constraint = r.constraint;
        res.alpha = a;
      }
    }
    for (int i = 0; i < d && ++idx[i] == per_axis; ++i) idx[i] = 0;
  }
  return res;
}

}  // namespace goemax
