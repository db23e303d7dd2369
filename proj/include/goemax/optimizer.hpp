#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "goemax/effectiveness.hpp"
#include "goemax/error.hpp"

namespace goemax {

// How the K x N activation matrix is parametrised during a solve.
enum class AlphaTying {
  kFull,          // one variable per (k in K_n, n queried)
  kPerAttribute,  // alpha_{k,n} = alpha_n
  kTied,          // one common alpha
};

class AlphaLayout {
 public:
  AlphaLayout(const ProblemInstance& inst, AlphaTying tying);

  AlphaTying tying() const { return tying_; }
  int dimension() const { return static_cast<int>(groups_.size()); }
  Eigen::MatrixXd expand(const Eigen::VectorXd& theta) const;
  // Mean of each tied group.
  Eigen::VectorXd compress(const Eigen::MatrixXd& alpha) const;
  // (k, n) cells driven by parameter i.
  const std::vector<std::pair<int, int>>& cells(int i) const { return groups_[i]; }
  // Schedule slots whose attribute is touched by parameter i.
  const std::vector<int>& slots(int i) const { return slots_[i]; }

 private:
  AlphaTying tying_;
  int rows_, cols_;
  std::vector<std::vector<std::pair<int, int>>> groups_;
  std::vector<std::vector<int>> slots_;
};

struct OptimizerConfig {
  double alpha_tol = 1e-7;        // epsilon_1, max-norm change of alpha
  double weight_tol = 1e-6;       // epsilon_2
  int max_inner = 300;            // N_i
  int max_outer = 4000;           // N_j
  double eta_first = 0.1;
  double eta_growth = 1.5;
  int eta_bisection_iters = 300;
  double constraint_tol = 1e-3;   // |g3(EUU) - EUU_min| at a converged point
  double fd_step = 1e-4;          // relative central-difference step
  double invert_tol = 1e-8;
  AlphaTying tying = AlphaTying::kFull;
  // Choose the scale of h so that dL/dw1 = dL/dw2 holds at the solution.
  bool calibrate_resource_scale = true;

  void validate() const;
};

struct ConvexityReport {
  bool h4 = true;
  bool h5 = true;
  bool h6 = true;
  // Smallest slack of each inequality over all coordinates (>= 0 when it holds).
  double h4_slack = 0.0;
  double h5_slack = 0.0;
  double h6_slack = 0.0;
  // Largest |D(delta) - D(delta/2)| over the first-order differences used.
  double richardson_gap = 0.0;

  bool all() const { return h4 && h5 && h6; }
};

struct Solution {
  Eigen::MatrixXd alpha_star;
  double w1 = 0.5;
  double w2 = 0.5;
  double eta = 0.0;
  double h_scale = 1.0;
  bool converged = false;
  bool printed_loop_converged = false;  // inner fixed point reached on every pass
  bool constraint_active = true;       // false: interior optimum, eta = 0
  bool boundary_alpha = false;  // some inversion hit alpha = 0 or 1
  bool target_clamped = false;
  double kkt_residual = 0.0;    // relative max-norm of dL/dalpha
  double constraint_gap = 0.0;  // |g3(EUU) - EUU_min|
  double eq14_relative_error = 0.0;
  int inner_iterations = 0;
  int outer_iterations = 0;
  ConvexityReport convexity;
  FeatureReport features;
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, Solution best) : Error(what), best_(std::move(best)) {}
  const Solution& best() const { return best_; }

 private:
  Solution best_;
};

// Error-probability target for the slot's attribute, computed from the
// current iterate's features. Throws InfeasibleTarget when the denominator
// is not positive. `clamped` reports a bracket above 1.
double target_error_probability(const EffectivenessModel& model, const FeatureReport& current, int slot, double eta,
                                double w1, bool* clamped = nullptr);

struct Inversion {
  double value = 0.0;
  bool at_boundary = false;
};

// Solves sum over the parameter's slots of P_e = sum of targets for
// parameter `param`, all other parameters held at theta. Smallest root.
Inversion invert_error_for_alpha(const EffectivenessModel& model, const AlphaLayout& layout,
                                 const Eigen::VectorXd& theta, int param, double target, double tol = 1e-8);

Solution solve_algorithm1(const EffectivenessModel& model, const OptimizerConfig& config);

ConvexityReport convexity_conditions(const EffectivenessModel& model, const AlphaLayout& layout,
                                     const Eigen::MatrixXd& alpha, double w1, double eta, double delta);

// Closed-form activation for large state spaces (P_e fixed at 1/2).
double large_state_alpha(const EffectivenessModel& model, int k, int slot, const Eigen::MatrixXd& alpha, double eta,
                         double w1);

// Gradient of L = w1 g1(EDE) + w2 g2(ERC) - eta g3(EUU) in layout coordinates,
// split into its three parts.
struct LagrangianGradient {
  Eigen::VectorXd ede_part;  // d g1(EDE)
  Eigen::VectorXd erc_part;  // d g2(ERC)
  Eigen::VectorXd euu_part;  // d g3(EUU)
};
// side 0: central differences; -1: backward (left derivative, useful at the
// kink where activation reaches the generation probability).
LagrangianGradient lagrangian_gradient(const EffectivenessModel& model, const AlphaLayout& layout,
                                       const Eigen::VectorXd& theta, double rel_step, int side = 0);

struct GridResult {
  bool feasible = false;
  Eigen::MatrixXd alpha;
  double objective = 0.0;
  double constraint = 0.0;
  long points = 0;
  long feasible_points = 0;
  // 1-D only: bounds of the feasible set on the grid.
  double feasible_lo = 0.0;
  double feasible_hi = 0.0;
};

GridResult grid_search_oracle(const EffectivenessModel& model, const AlphaLayout& layout, double grid_step,
                              long max_points = 10'000'000);

}  // namespace goemax
