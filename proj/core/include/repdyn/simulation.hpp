#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "repdyn/analysis.hpp"
#include "repdyn/game.hpp"
#include "repdyn/learning.hpp"

namespace repdyn {

// Invalid configuration value; field() names the offending config key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class JudgingMode { Centralized, Decentralized };

// How seeded agents behave when drawn as third-party judges.
enum class SeedJudging { FixedNorm, RandomNorm, Excluded };

struct SimConfig {
  std::size_t n_agents = 10;
  std::size_t episodes = 10000;
  std::size_t encounters_per_episode = 200;
  PayoffParams payoff{5.0, 1.0};
  double chi = 1e-3;
  LearnerParams learner;
  double seed_fraction = 0.0;
  JudgingMode mode = JudgingMode::Centralized;
  SocialNorm norm{9};  // enforced norm in centralized mode
  ActionRule seed_rule{5};
  SocialNorm seed_norm{9};
  SeedJudging seed_judging = SeedJudging::RandomNorm;
  std::uint64_t rng_seed = 1;
  double metric_window = 0.5;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
  std::size_t seeded_count() const;
  std::size_t learner_count() const { return n_agents - seeded_count(); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct AgentSlot {
  enum class Kind { Learner, Seeded };

  Kind kind = Kind::Learner;
  std::optional<Learner> learner;  // engaged iff kind == Learner
  ActionRule rule;                 // seeded only
  SocialNorm norm;                 // seeded only
  Reputation rep = Reputation::Bad;

  bool seeded() const { return kind == Kind::Seeded; }
};

struct EpisodeRecord {
  std::size_t episode_index = 0;
  // Extrinsic payoff per encounter participation, pooled over the population.
  double mean_reward = 0.0;
  double coop_level = 0.0;
  // Fraction of learner actions that were cooperative.
  double learner_coop_level = 0.0;
  PolicyCensus census;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct RunSummary {
  SimConfig config;
  bool has_data = false;
  std::size_t window_episodes = 0;
  double coop_final = 0.0;
  double learner_coop_final = 0.0;
  PolicyCensus final_census;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct SimulationResult {
  std::vector<EpisodeRecord> episodes;
  RunSummary summary;
  std::vector<QTable> final_tables;  // one per learner, in agent order
};

class Simulation {
 public:
  explicit Simulation(SimConfig config);

  const SimConfig& config() const { return config_; }
  const std::vector<AgentSlot>& agents() const { return agents_; }
  void set_reputation(std::size_t agent, Reputation rep) { agents_.at(agent).rep = rep; }

  // One game between i and j: actions, payoffs, judging of both parties from
  // their pre-encounter reputations, and transition recording for learners.
  // Returns the extrinsic payoffs (i's, j's). Throws if i == j.
  std::pair<double, double> run_encounter(std::size_t i, std::size_t j);

  // Full episode starting from uniformly random reputations.
  EpisodeRecord run_episode();
  // Full episode starting from the given reputations (one per agent).
  EpisodeRecord run_episode(std::span<const Reputation> initial);

  std::vector<QTable> learner_tables() const;
  PolicyCensus census() const;

 private:
  Action choose_action(AgentSlot& agent, Reputation own, Reputation opp);
  Reputation judge_party(std::size_t judge, Action party_action, Reputation party_opp_rep);
  std::size_t draw_judge(std::size_t i, std::size_t j);
  EpisodeRecord play_episode();

  SimConfig config_;
  Rng rng_;
  std::vector<AgentSlot> agents_;
  std::vector<std::size_t> judge_pool_;
  std::size_t episode_index_ = 0;

  // Per-episode tallies.
  double total_payoff_ = 0.0;
  long participations_ = 0;
  long learner_actions_ = 0;
  long learner_cooperations_ = 0;
};

// Runs config.episodes episodes on one RNG stream seeded from config.rng_seed.
SimulationResult run_simulation(const SimConfig& config);

// Mean of the last `window` fraction of episodes (at least one episode).
RunSummary summarize(const SimConfig& config, std::span<const EpisodeRecord> episodes, const PolicyCensus& final_census);

std::string to_string(JudgingMode mode);
std::string to_string(SeedJudging policy);
JudgingMode judging_mode_from(const std::string& name);
SeedJudging seed_judging_from(const std::string& name);

}  // namespace repdyn
