#pragma once

// Infinite-population, monomorphic stability analysis of (action rule, norm)
// pairs. Each agent's reputation is a two-state Markov chain driven by
// opponents whose reputations are drawn from the resident stationary
// distribution; a resident rule is stable when no single mutant rule earns
// more against residents than residents earn against each other.

#include <array>
#include <cstddef>
#include <vector>

#include "repdyn/game.hpp"

namespace repdyn {

struct StationaryReputation {
  double g = 0.0;                     // long-run probability of reputation 1
  std::array<double, 2> own_rep_dist{1.0, 0.0};
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;              // |F(g) - g| at the returned iterate
};

struct SolverOptions {
  double damping = 0.5;
  double tolerance = 1e-12;
  std::size_t max_iterations = 100000;
  double initial_guess = 0.5;
};

// Probability that an agent with reputation `own` is assigned reputation 1
// after one encounter with an opponent that is good with probability
// `opponent_good`.
double next_good_probability(ActionRule rule, SocialNorm norm, double chi, Reputation own, double opponent_good);

// Stationary P(rep = 1) of one agent's reputation chain when opponents are good
// with probability `opponent_good`. If the chain has no transitions out of
// either state (possible only with chi = 0) `fallback` is returned.
double chain_stationary_good(ActionRule rule, SocialNorm norm, double chi, double opponent_good, double fallback);

// Damped fixed-point solve of g = chain_stationary_good(rule, norm, chi, g, g).
// Never throws on non-convergence; check `converged`.
StationaryReputation stationary_good_fraction(ActionRule rule, SocialNorm norm, double chi,
                                              const SolverOptions& options = {});

struct PayoffEstimate {
  double value = 0.0;
  bool converged = false;
};

PayoffEstimate resident_payoff(ActionRule rule, SocialNorm norm, double chi, const PayoffParams& params,
                               const SolverOptions& options = {});

// Expected payoff of a single mutant meeting residents. The mutant's own
// reputation follows its chain against resident opponents.
PayoffEstimate mutant_payoff(ActionRule mutant, ActionRule resident, SocialNorm norm, double chi,
                             const PayoffParams& params, const SolverOptions& options = {});

enum class Stability { Stable, Neutral, Unstable };

struct StabilityVerdict {
  ActionRule resident_rule;
  SocialNorm norm;
  double good_fraction = 0.0;
  double resident_payoff = 0.0;
  ActionRule worst_mutant;         // highest-earning mutant
  double worst_mutant_payoff = 0.0;
  // Every mutant earns less than the resident by more than the tie margin.
  bool stable = false;
  // No mutant earns more than the resident by more than the tie margin.
  bool weakly_stable = false;
  bool converged = false;

  Stability classification() const {
    return stable ? Stability::Stable : weakly_stable ? Stability::Neutral : Stability::Unstable;
  }
};

inline constexpr double kStabilityMargin = 1e-9;

StabilityVerdict assess_stability(ActionRule resident, SocialNorm norm, double chi, const PayoffParams& params,
                                  const SolverOptions& options = {});

// All 16 resident rules under one norm, sorted by resident payoff (descending).
std::vector<StabilityVerdict> stability_scan(SocialNorm norm, double chi, const PayoffParams& params,
                                             const SolverOptions& options = {});

// 16 x 16 scan: norms in ascending order, each block sorted as stability_scan.
std::vector<StabilityVerdict> stability_scan_all(double chi, const PayoffParams& params,
                                                 const SolverOptions& options = {});

const char* to_string(Stability s);

}  // namespace repdyn
