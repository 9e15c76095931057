#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "repdyn/game.hpp"

namespace repdyn {

// Q-table rows. Play states 0..3 are (own rep, opponent rep); judge states
// 4..7 are (judged action, judged party's opponent rep) and only exist when
// agents assign reputations themselves.
using StateId = std::uint8_t;

inline constexpr StateId kNumPlayStates = 4;
inline constexpr StateId kNumStates = 8;
inline constexpr StateId kTerminal = 0xFF;

struct PlayState {
  Reputation own;
  Reputation opp;

  constexpr StateId id() const { return StateId(2 * to_int(own) + to_int(opp)); }
};

struct JudgeState {
  Action judged_action;
  Reputation judged_opp_rep;

  constexpr StateId id() const { return StateId(kNumPlayStates + 2 * to_int(judged_action) + to_int(judged_opp_rep)); }
};

constexpr bool is_judge_state(StateId s) { return s >= kNumPlayStates && s < kNumStates; }

struct LearnerParams {
  double beta = 1e-2;
  double gamma = 0.99;
  double epsilon = 0.1;
  // Weight on the introspective (self-encounter) payoff; 0 means extrinsic reward only.
  double alpha = 0.0;

  void validate() const;
  friend bool operator==(const LearnerParams&, const LearnerParams&) = default;
};

class QTable {
 public:
  explicit QTable(bool with_judge_states = false) : judging_(with_judge_states) {}

  bool has_judge_states() const { return judging_; }
  bool contains(StateId s) const { return s < kNumPlayStates || (judging_ && is_judge_state(s)); }
  std::size_t entry_count() const { return judging_ ? 16 : 8; }

  double& at(StateId s, int action) { return values_[s][action]; }
  double at(StateId s, int action) const { return values_[s][action]; }

  // Greedy action; ties go to action 0.
  int greedy(StateId s) const { return values_[s][1] > values_[s][0] ? 1 : 0; }
  bool tied(StateId s) const { return values_[s][1] == values_[s][0]; }
  double max_value(StateId s) const { return values_[s][1] > values_[s][0] ? values_[s][1] : values_[s][0]; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::array<std::array<double, 2>, kNumStates> values_{};
  bool judging_ = false;
};

struct Transition {
  StateId state = 0;
  std::uint8_t action = 0;
  double reward = 0.0;
  StateId next_state = kTerminal;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Epsilon-greedy: greedy with probability 1 - epsilon, otherwise a uniform
// draw over {0, 1} (which may coincide with the greedy action).
int select_action(const QTable& q, StateId state, double epsilon, Rng& rng);

// One tabular Q-learning step; a terminal next state contributes no bootstrap.
void q_update(QTable& q, const Transition& t, double beta, double gamma);

// Applies q_update over the buffer in collection order, then clears it.
void learn_episode(QTable& q, std::vector<Transition>& buffer, const LearnerParams& params);

// Blends the encounter payoff with the payoff of a simulated self-encounter in
// state (own_rep, own_rep): (1 - alpha) * extrinsic + alpha * self_payoff. Both
// copies act through select_action with the agent's epsilon. Draws from `rng`
// only when alpha > 0; touches no reputation or buffer.
double introspective_reward(double extrinsic, const QTable& q, Reputation own_rep, const LearnerParams& params,
                            const PayoffParams& payoff_params, Rng& rng);

// A learning agent's table plus its current-episode trajectory. Appending a
// transition sets the previous one's next_state, so each agent's trajectory is
// chained through its own consecutive observations.
class Learner {
 public:
  explicit Learner(bool with_judge_states = false) : q_(with_judge_states) {}

  const QTable& table() const { return q_; }
  QTable& table() { return q_; }
  const std::vector<Transition>& buffer() const { return buffer_; }

  void record(StateId state, int action, double reward);
  void learn(const LearnerParams& params) { learn_episode(q_, buffer_, params); }

 private:
  QTable q_;
  std::vector<Transition> buffer_;
};

}  // namespace repdyn
