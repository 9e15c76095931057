#include "repdyn/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace repdyn {

namespace {

void check(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::size_t SimConfig::seeded_count() const {
  return static_cast<std::size_t>(std::lround(seed_fraction * static_cast<double>(n_agents)));
}

void SimConfig::validate() const {
  check(n_agents >= 2, "n_agents", "need at least 2 agents");
  check(mode != JudgingMode::Decentralized || n_agents >= 3, "n_agents",
        "decentralized judging needs at least 3 agents");
  check(encounters_per_episode >= 1, "encounters_per_episode", "must be positive");
  try {
    payoff.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("payoff", e.what());
  }
  check(chi >= 0.0 && chi < 0.5, "chi", "must be in [0, 0.5)");
  check(learner.beta > 0.0 && learner.beta <= 1.0, "learner.beta", "must be in (0, 1]");
  check(learner.gamma >= 0.0 && learner.gamma < 1.0, "learner.gamma", "must be in [0, 1)");
  check(learner.epsilon >= 0.0 && learner.epsilon <= 1.0, "learner.epsilon", "must be in [0, 1]");
  check(learner.alpha >= 0.0 && learner.alpha <= 1.0, "learner.alpha", "must be in [0, 1]");
  check(seed_fraction >= 0.0 && seed_fraction <= 1.0, "seed_fraction", "must be in [0, 1]");
  check(metric_window > 0.0 && metric_window <= 1.0, "metric_window", "must be in (0, 1]");
  check(mode != JudgingMode::Decentralized || seed_judging != SeedJudging::Excluded || learner_count() >= 3,
        "seed_judging", "excluding seeded judges needs at least 3 learners");
}

Simulation::Simulation(SimConfig config) : config_(std::move(config)), rng_(config_.rng_seed) {
  config_.validate();
  const bool judging = config_.mode == JudgingMode::Decentralized;
  const std::size_t seeded = config_.seeded_count();
  agents_.resize(config_.n_agents);
  for (std::size_t k = 0; k < agents_.size(); ++k) {
    AgentSlot& agent = agents_[k];
    if (k < seeded) {
      agent.kind = AgentSlot::Kind::Seeded;
      agent.rule = config_.seed_rule;
      agent.norm = config_.seed_norm;
      if (judging && config_.seed_judging == SeedJudging::RandomNorm) {
        agent.norm = SocialNorm(static_cast<int>(uniform_below(rng_, 16)));
      }
    } else {
      agent.kind = AgentSlot::Kind::Learner;
      agent.learner.emplace(judging);
    }
  }
  judge_pool_.reserve(agents_.size());
}

Action Simulation::choose_action(AgentSlot& agent, Reputation own, Reputation opp) {
  if (agent.seeded()) return agent.rule.act(own, opp);
  return action_from(select_action(agent.learner->table(), PlayState{own, opp}.id(), config_.learner.epsilon, rng_));
}

std::size_t Simulation::draw_judge(std::size_t i, std::size_t j) {
  if (config_.seed_judging == SeedJudging::Excluded) {
    judge_pool_.clear();
    for (std::size_t k = 0; k < agents_.size(); ++k) {
      if (k != i && k != j && !agents_[k].seeded()) judge_pool_.push_back(k);
    }
    return judge_pool_[uniform_below(rng_, judge_pool_.size())];
  }
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  std::size_t k = uniform_below(rng_, agents_.size() - 2);
  if (k >= lo) ++k;
  if (k >= hi) ++k;
  return k;
}

Reputation Simulation::judge_party(std::size_t judge, Action party_action, Reputation party_opp_rep) {
  AgentSlot& agent = agents_[judge];
  if (agent.seeded()) return agent.norm.judge(party_action, party_opp_rep);
  const StateId state = JudgeState{party_action, party_opp_rep}.id();
  const int judgment = select_action(agent.learner->table(), state, config_.learner.epsilon, rng_);
  agent.learner->record(state, judgment, 0.0);
  return reputation_from(judgment);
}

std::pair<double, double> Simulation::run_encounter(std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("run_encounter: an agent cannot meet itself");
  AgentSlot& a = agents_.at(i);
  AgentSlot& b = agents_.at(j);
  const Reputation rep_a = a.rep;
  const Reputation rep_b = b.rep;

  const Action act_a = choose_action(a, rep_a, rep_b);
  const Action act_b = choose_action(b, rep_b, rep_a);
  const double pay_a = payoff(act_a, act_b, config_.payoff);
  const double pay_b = payoff(act_b, act_a, config_.payoff);

  Reputation intended_a;
  Reputation intended_b;
  if (config_.mode == JudgingMode::Centralized) {
    intended_a = config_.norm.judge(act_a, rep_b);
    intended_b = config_.norm.judge(act_b, rep_a);
  } else {
    const std::size_t judge = draw_judge(i, j);
    intended_a = judge_party(judge, act_a, rep_b);
    intended_b = judge_party(judge, act_b, rep_a);
  }
  const Reputation new_a = assign_with_error(intended_a, config_.chi, rng_);
  const Reputation new_b = assign_with_error(intended_b, config_.chi, rng_);

  for (auto [agent, own, opp, act, pay] : {std::tuple{&a, rep_a, rep_b, act_a, pay_a},
                                           std::tuple{&b, rep_b, rep_a, act_b, pay_b}}) {
    if (agent->seeded()) continue;
    const double reward =
        introspective_reward(pay, agent->learner->table(), own, config_.learner, config_.payoff, rng_);
    agent->learner->record(PlayState{own, opp}.id(), to_int(act), reward);
    ++learner_actions_;
    if (act == Action::Cooperate) ++learner_cooperations_;
  }

  a.rep = new_a;
  b.rep = new_b;
  total_payoff_ += pay_a + pay_b;
  participations_ += 2;
  return {pay_a, pay_b};
}

EpisodeRecord Simulation::run_episode() {
  for (AgentSlot& agent : agents_) agent.rep = reputation_from(static_cast<int>(rng_() >> 63));
  return play_episode();
}

EpisodeRecord Simulation::run_episode(std::span<const Reputation> initial) {
  if (initial.size() != agents_.size()) throw std::invalid_argument("run_episode: one reputation per agent required");
  for (std::size_t k = 0; k < agents_.size(); ++k) agents_[k].rep = initial[k];
  return play_episode();
}

EpisodeRecord Simulation::play_episode() {
  total_payoff_ = 0.0;
  participations_ = 0;
  learner_actions_ = 0;
  learner_cooperations_ = 0;

  const std::size_t n = agents_.size();
  for (std::size_t e = 0; e < config_.encounters_per_episode; ++e) {
    const std::size_t i = uniform_below(rng_, n);
    std::size_t j = uniform_below(rng_, n - 1);
    if (j >= i) ++j;
    run_encounter(i, j);
  }
  for (AgentSlot& agent : agents_) {
    if (!agent.seeded()) agent.learner->learn(config_.learner);
  }

  EpisodeRecord record;
  record.episode_index = episode_index_++;
  record.mean_reward = total_payoff_ / static_cast<double>(participations_);
  // Pooled payoffs equal (b - c) times the cooperation count, so this stays in [0, 1].
  record.coop_level = std::clamp(record.mean_reward / config_.payoff.mutual_cooperation(), 0.0, 1.0);
  record.learner_coop_level =
      learner_actions_ == 0 ? 0.0 : static_cast<double>(learner_cooperations_) / static_cast<double>(learner_actions_);
  record.census = census();
  return record;
}

std::vector<QTable> Simulation::learner_tables() const {
  std::vector<QTable> tables;
  for (const AgentSlot& agent : agents_) {
    if (!agent.seeded()) tables.push_back(agent.learner->table());
  }
  return tables;
}

PolicyCensus Simulation::census() const {
  PolicyCensus result = take_census(learner_tables());
  result.has_norms = config_.mode == JudgingMode::Decentralized;
  return result;
}

RunSummary summarize(const SimConfig& config, std::span<const EpisodeRecord> episodes,
                     const PolicyCensus& final_census) {
  RunSummary summary;
  summary.config = config;
  summary.final_census = final_census;
  if (episodes.empty()) return summary;
  const auto window = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(config.metric_window * static_cast<double>(episodes.size()))), 1,
      episodes.size());
  double coop = 0.0;
  double learner_coop = 0.0;
  for (const EpisodeRecord& record : episodes.last(window)) {
    coop += record.coop_level;
    learner_coop += record.learner_coop_level;
  }
  summary.has_data = true;
  summary.window_episodes = window;
  summary.coop_final = coop / static_cast<double>(window);
  summary.learner_coop_final = learner_coop / static_cast<double>(window);
  return summary;
}

SimulationResult run_simulation(const SimConfig& config) {
  Simulation sim(config);
  SimulationResult result;
  result.episodes.reserve(config.episodes);
  for (std::size_t e = 0; e < config.episodes; ++e) result.episodes.push_back(sim.run_episode());
  result.final_tables = sim.learner_tables();
  result.summary = summarize(config, result.episodes, sim.census());
  return result;
}

std::string to_string(JudgingMode mode) {
  return mode == JudgingMode::Centralized ? "centralized" : "decentralized";
}

std::string to_string(SeedJudging policy) {
  switch (policy) {
    case SeedJudging::FixedNorm: return "norm";
    case SeedJudging::RandomNorm: return "random";
    case SeedJudging::Excluded: return "excluded";
  }
  return "norm";
}

JudgingMode judging_mode_from(const std::string& name) {
  if (name == "centralized") return JudgingMode::Centralized;
  if (name == "decentralized") return JudgingMode::Decentralized;
  throw ConfigError("mode", "expected 'centralized' or 'decentralized', got '" + name + "'");
}

SeedJudging seed_judging_from(const std::string& name) {
  if (name == "norm") return SeedJudging::FixedNorm;
  if (name == "random") return SeedJudging::RandomNorm;
  if (name == "excluded") return SeedJudging::Excluded;
  throw ConfigError("seed_judging", "expected 'norm', 'random' or 'excluded', got '" + name + "'");
}

}  // namespace repdyn
