#pragma once

#include <span>
#include <utility>
#include <vector>

#include "goemax/core_model.hpp"
#include "goemax/random.hpp"

namespace goemax {

struct LinkBudget {
  double path_loss_exponent = 3.8;
  double noise_w = 1e-15;     // sigma_m^2
  double snr_threshold = 10;  // linear gamma_th

  void validate() const;
  // Lambda = d^a / rho; the received power of that link is Exp with this rate.
  double lambda(double distance_m, double power_w) const;
  // Omega = d^a / (gamma_th rho).
  double omega(double distance_m, double power_w) const { return lambda(distance_m, power_w) / snr_threshold; }
};

// Transmitters seen by one NMA while ISA k sends: collaborators add to k's
// signal, interferers add to the denominator of the SINR.
struct LinkSets {
  int k = 0;
  int m = 0;
  std::vector<int> collaborators;
  std::vector<int> interferers;
};

// Rate form of a link configuration: lambda over C_k = C u {k}, omega over I.
struct LinkRates {
  std::vector<double> lambda;
  std::vector<double> omega;
};

LinkRates link_rates(const LinkSets& sets, const LinkBudget& budget, const Topology& topo,
                     std::span<const double> tx_power_w);

// Partial-fraction closed form of Pr(SINR > gamma_th). Throws DegenerateGeometry
// when two lambda (or omega) values coincide within relative tolerance.
double success_probability_closed_form(const LinkRates& rates, const LinkBudget& budget);
double success_probability_closed_form(const LinkSets& sets, const LinkBudget& budget, const Topology& topo,
                                       std::span<const double> tx_power_w);

// Same probability through the phase-type representation of the summed
// signal; stable when rates are close or equal.
double success_probability_phase_type(const LinkRates& rates, const LinkBudget& budget);

// Closed form when it is well conditioned, phase-type otherwise.
double success_probability(const LinkRates& rates, const LinkBudget& budget);

double success_probability_mc(const LinkRates& rates, const LinkBudget& budget, long draws, Rng& rng);
double success_probability_mc(const LinkSets& sets, const LinkBudget& budget, const Topology& topo,
                              std::span<const double> tx_power_w, long draws, Rng& rng);

// Markov's inequality on exp(theta (S - gamma_th I)), minimised over theta.
double chernoff_success_bound(const LinkRates& rates, const LinkBudget& budget);

// Expectation of the bound over weighted collaborator-set outcomes; each
// outcome carries the lambda list of C_k. Interferers are fixed.
struct CollaboratorOutcome {
  double weight = 1.0;
  std::vector<double> lambda;
};
double success_probability_upper_bound(std::span<const CollaboratorOutcome> outcomes,
                                       std::span<const double> omega, const LinkBudget& budget);

// The interference expression exactly as printed next to the Markov bound
// (third power of lambda), clamped to [0, 1]. Reference only: it is not a
// bound in physical units.
double markov_expression_as_printed(const LinkRates& rates, const LinkBudget& budget, bool clamp = true);

// Pr(fewer than quorum successes) for independent per-NMA decode events.
double quorum_failure(std::span<const double> success, int quorum);

// The `count` NMAs farthest from ISA k; ties broken by ascending index.
std::vector<int> farthest_nmas(const Topology& topo, int k, int count);

}  // namespace goemax
