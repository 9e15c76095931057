#include "repdyn/learning.hpp"

#include <stdexcept>
#include <string>

namespace repdyn {

void LearnerParams::validate() const {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("learner: beta must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("learner: gamma must be in [0, 1)");
  if (!in(epsilon, 0.0, 1.0)) throw std::invalid_argument("learner: epsilon must be in [0, 1]");
  if (!in(alpha, 0.0, 1.0)) throw std::invalid_argument("learner: alpha must be in [0, 1]");
}

int select_action(const QTable& q, StateId state, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return static_cast<int>(rng() >> 63);
  }
  return q.greedy(state);
}

void q_update(QTable& q, const Transition& t, double beta, double gamma) {
  const double bootstrap = t.next_state == kTerminal ? 0.0 : gamma * q.max_value(t.next_state);
  double& entry = q.at(t.state, t.action);
  entry += beta * (t.reward + bootstrap - entry);
}

void learn_episode(QTable& q, std::vector<Transition>& buffer, const LearnerParams& params) {
  for (const Transition& t : buffer) q_update(q, t, params.beta, params.gamma);
  buffer.clear();
}

double introspective_reward(double extrinsic, const QTable& q, Reputation own_rep, const LearnerParams& params,
                            const PayoffParams& payoff_params, Rng& rng) {
  if (params.alpha <= 0.0) return extrinsic;
  const StateId mirror = PlayState{own_rep, own_rep}.id();
  const Action self = action_from(select_action(q, mirror, params.epsilon, rng));
  const Action copy = action_from(select_action(q, mirror, params.epsilon, rng));
  const double self_payoff = payoff(self, copy, payoff_params);
  return (1.0 - params.alpha) * extrinsic + params.alpha * self_payoff;
}

void Learner::record(StateId state, int action, double reward) {
  if (!buffer_.empty()) buffer_.back().next_state = state;
  buffer_.push_back(Transition{state, static_cast<std::uint8_t>(action), reward, kTerminal});
}

}  // namespace repdyn
