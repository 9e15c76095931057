#include "repdyn/stability.hpp"

#include <algorithm>
#include <cmath>

namespace repdyn {

namespace {

constexpr Reputation kReps[2] = {Reputation::Bad, Reputation::Good};

double assigned_good(SocialNorm norm, Action action, Reputation opp, double chi) {
  return norm.judge(action, opp) == Reputation::Good ? 1.0 - chi : chi;
}

std::array<double, 2> distribution(double g) { return {1.0 - g, g}; }

double expected_payoff(ActionRule focal, const std::array<double, 2>& focal_dist, ActionRule other,
                       const std::array<double, 2>& other_dist, const PayoffParams& params) {
  double total = 0.0;
  for (Reputation own : kReps) {
    for (Reputation opp : kReps) {
      const double weight = focal_dist[to_int(own)] * other_dist[to_int(opp)];
      if (weight == 0.0) continue;
      total += weight * payoff(focal.act(own, opp), other.act(opp, own), params);
    }
  }
  return total;
}

}  // namespace

double next_good_probability(ActionRule rule, SocialNorm norm, double chi, Reputation own, double opponent_good) {
  double p = 0.0;
  for (Reputation opp : kReps) {
    const double weight = opp == Reputation::Good ? opponent_good : 1.0 - opponent_good;
    p += weight * assigned_good(norm, rule.act(own, opp), opp, chi);
  }
  return p;
}

double chain_stationary_good(ActionRule rule, SocialNorm norm, double chi, double opponent_good, double fallback) {
  const double up = next_good_probability(rule, norm, chi, Reputation::Bad, opponent_good);
  const double down = 1.0 - next_good_probability(rule, norm, chi, Reputation::Good, opponent_good);
  const double rate = up + down;
  if (rate <= 0.0) return fallback;
  return up / rate;
}

StationaryReputation stationary_good_fraction(ActionRule rule, SocialNorm norm, double chi,
                                              const SolverOptions& options) {
  validate_assignment_error(chi);
  StationaryReputation result;
  double g = options.initial_guess;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const double mapped = chain_stationary_good(rule, norm, chi, g, g);
    result.residual = std::abs(mapped - g);
    result.iterations = it + 1;
    if (result.residual <= options.tolerance) {
      g = mapped;
      result.converged = true;
      break;
    }
    g = options.damping * g + (1.0 - options.damping) * mapped;
  }
  result.g = g;
  result.own_rep_dist = distribution(g);
  return result;
}

PayoffEstimate resident_payoff(ActionRule rule, SocialNorm norm, double chi, const PayoffParams& params,
                               const SolverOptions& options) {
  const StationaryReputation st = stationary_good_fraction(rule, norm, chi, options);
  return {expected_payoff(rule, st.own_rep_dist, rule, st.own_rep_dist, params), st.converged};
}

PayoffEstimate mutant_payoff(ActionRule mutant, ActionRule resident, SocialNorm norm, double chi,
                             const PayoffParams& params, const SolverOptions& options) {
  const StationaryReputation st = stationary_good_fraction(resident, norm, chi, options);
  // At the resident fixed point the mutant chain is the resident chain.
  const double mutant_good = mutant == resident ? st.g : chain_stationary_good(mutant, norm, chi, st.g, st.g);
  return {expected_payoff(mutant, distribution(mutant_good), resident, st.own_rep_dist, params), st.converged};
}

StabilityVerdict assess_stability(ActionRule resident, SocialNorm norm, double chi, const PayoffParams& params,
                                  const SolverOptions& options) {
  const StationaryReputation st = stationary_good_fraction(resident, norm, chi, options);
  StabilityVerdict verdict;
  verdict.resident_rule = resident;
  verdict.norm = norm;
  verdict.good_fraction = st.g;
  verdict.converged = st.converged;
  verdict.resident_payoff = expected_payoff(resident, st.own_rep_dist, resident, st.own_rep_dist, params);

  bool first = true;
  for (int code = 0; code < 16; ++code) {
    const ActionRule mutant(code);
    if (mutant == resident) continue;
    const double mutant_good = chain_stationary_good(mutant, norm, chi, st.g, st.g);
    const double value = expected_payoff(mutant, distribution(mutant_good), resident, st.own_rep_dist, params);
    if (first || value > verdict.worst_mutant_payoff) {
      verdict.worst_mutant = mutant;
      verdict.worst_mutant_payoff = value;
      first = false;
    }
  }
  const double best_gap = verdict.resident_payoff - verdict.worst_mutant_payoff;
  verdict.stable = best_gap > kStabilityMargin;
  verdict.weakly_stable = best_gap >= -kStabilityMargin;
  return verdict;
}

std::vector<StabilityVerdict> stability_scan(SocialNorm norm, double chi, const PayoffParams& params,
                                             const SolverOptions& options) {
  params.validate();
  validate_assignment_error(chi);
  std::vector<StabilityVerdict> verdicts;
  verdicts.reserve(16);
  for (int code = 0; code < 16; ++code) {
    verdicts.push_back(assess_stability(ActionRule(code), norm, chi, params, options));
  }
  std::stable_sort(verdicts.begin(), verdicts.end(), [](const StabilityVerdict& a, const StabilityVerdict& b) {
    return a.resident_payoff > b.resident_payoff;
  });
  return verdicts;
}

std::vector<StabilityVerdict> stability_scan_all(double chi, const PayoffParams& params,
                                                 const SolverOptions& options) {
  std::vector<StabilityVerdict> all;
  all.reserve(256);
  for (int code = 0; code < 16; ++code) {
    auto block = stability_scan(SocialNorm(code), chi, params, options);
    all.insert(all.end(), block.begin(), block.end());
  }
  return all;
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Neutral: return "neutral";
    case Stability::Unstable: return "unstable";
  }
  return "unstable";
}

}  // namespace repdyn
