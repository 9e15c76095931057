#include <gtest/gtest.h>

#include <vector>

#include "repdyn/simulation.hpp"

using namespace repdyn;

namespace {

SimConfig all_seeded(int rule, std::size_t n = 10) {
  SimConfig c;
  c.n_agents = n;
  c.seed_fraction = 1.0;
  c.seed_rule = ActionRule(rule);
  c.chi = 0.0;
  return c;
}

// With b=5, c=1 the payoff pair identifies both actions.
std::pair<Action, Action> actions_from(std::pair<double, double> pay) {
  const bool j_coop = pay.first == 5.0 || pay.first == 4.0;
  const bool i_coop = pay.second == 5.0 || pay.second == 4.0;
  return {action_from(i_coop), action_from(j_coop)};
}

}  // namespace

TEST(Encounter, NormNineMutualCooperationKeepsGoodReputations) {
  SimConfig c = all_seeded(15, 2);
  Simulation sim(c);
  sim.set_reputation(0, Reputation::Good);
  sim.set_reputation(1, Reputation::Good);
  const auto [p0, p1] = sim.run_encounter(0, 1);
  EXPECT_EQ(p0, 4.0);
  EXPECT_EQ(p1, 4.0);
  EXPECT_EQ(sim.agents()[0].rep, Reputation::Good);
  EXPECT_EQ(sim.agents()[1].rep, Reputation::Good);
}

TEST(Encounter, NormZeroAlwaysAssignsBad) {
  for (int rule : {0, 5, 15}) {
    SimConfig c = all_seeded(rule, 2);
    c.norm = SocialNorm(0);
    Simulation sim(c);
    sim.set_reputation(0, Reputation::Good);
    sim.set_reputation(1, Reputation::Bad);
    sim.run_encounter(0, 1);
    EXPECT_EQ(sim.agents()[0].rep, Reputation::Bad);
    EXPECT_EQ(sim.agents()[1].rep, Reputation::Bad);
  }
}

TEST(Encounter, SeededJudgeWithNormNine) {
  SimConfig c = all_seeded(0, 3);
  c.mode = JudgingMode::Decentralized;
  c.seed_judging = SeedJudging::FixedNorm;
  c.seed_norm = SocialNorm(9);
  Simulation sim(c);
  sim.set_reputation(0, Reputation::Good);
  sim.set_reputation(1, Reputation::Bad);
  sim.run_encounter(0, 1);
  EXPECT_EQ(sim.agents()[0].rep, Reputation::Good);  // defected against a bad opponent
  EXPECT_EQ(sim.agents()[1].rep, Reputation::Bad);   // defected against a good opponent
}

TEST(Encounter, BothPartiesJudgedFromPreEncounterReputations) {
  // Rule 5 cooperates only with good opponents. Agent 0 (good) meets agent 1 (bad):
  // 0 defects against bad -> good under norm 9; 1 cooperates with good -> good.
  SimConfig c = all_seeded(5, 2);
  Simulation sim(c);
  sim.set_reputation(0, Reputation::Good);
  sim.set_reputation(1, Reputation::Bad);
  const auto pay = sim.run_encounter(0, 1);
  EXPECT_EQ(pay.first, 5.0);
  EXPECT_EQ(pay.second, -1.0);
  EXPECT_EQ(sim.agents()[0].rep, Reputation::Good);
  EXPECT_EQ(sim.agents()[1].rep, Reputation::Good);
}

TEST(Encounter, RejectsSelfMatch) {
  Simulation sim(SimConfig{});
  EXPECT_THROW(sim.run_encounter(3, 3), std::invalid_argument);
}

TEST(Encounter, PayoffConservation) {
  SimConfig c;
  c.learner.epsilon = 0.5;
  c.seed_fraction = 0.3;
  Simulation sim(c);
  Rng gen(1);
  for (int k = 0; k < 10000; ++k) {
    const std::size_t i = uniform_below(gen, 10);
    std::size_t j = uniform_below(gen, 9);
    if (j >= i) ++j;
    const auto pay = sim.run_encounter(i, j);
    const auto [ai, aj] = actions_from(pay);
    EXPECT_DOUBLE_EQ(pay.first + pay.second, 4.0 * (to_int(ai) + to_int(aj)));
  }
}

TEST(Encounter, ZeroErrorReputationIsLastJudgment) {
  for (double alpha : {0.0, 0.6}) {
    SimConfig c;
    c.chi = 0.0;
    c.learner.epsilon = 0.5;
    c.learner.alpha = alpha;
    c.seed_fraction = 0.2;
    Simulation sim(c);
    Rng gen(2);
    for (int k = 0; k < 2000; ++k) {
      const std::size_t i = uniform_below(gen, 10);
      std::size_t j = uniform_below(gen, 9);
      if (j >= i) ++j;
      const Reputation ri = sim.agents()[i].rep, rj = sim.agents()[j].rep;
      const auto [ai, aj] = actions_from(sim.run_encounter(i, j));
      EXPECT_EQ(sim.agents()[i].rep, c.norm.judge(ai, rj));
      EXPECT_EQ(sim.agents()[j].rep, c.norm.judge(aj, ri));
    }
  }
}

TEST(Encounter, BufferLengthsCountParticipations) {
  SimConfig c;
  c.seed_fraction = 0.2;
  Simulation sim(c);
  std::vector<std::size_t> plays(10, 0);
  Rng gen(3);
  for (int k = 0; k < 500; ++k) {
    const std::size_t i = uniform_below(gen, 10);
    std::size_t j = uniform_below(gen, 9);
    if (j >= i) ++j;
    sim.run_encounter(i, j);
    ++plays[i];
    ++plays[j];
  }
  for (std::size_t k = 0; k < 10; ++k) {
    const AgentSlot& a = sim.agents()[k];
    if (a.seeded()) {
      EXPECT_FALSE(a.learner.has_value());
    } else {
      EXPECT_EQ(a.learner->buffer().size(), plays[k]);
      EXPECT_EQ(a.learner->buffer().back().next_state, kTerminal);
    }
  }
}

TEST(Encounter, ThirdPartyJudgeRecordsTwoJudgeTransitions) {
  SimConfig c;
  c.n_agents = 3;
  c.mode = JudgingMode::Decentralized;
  Simulation sim(c);
  sim.run_encounter(0, 1);
  EXPECT_EQ(sim.agents()[0].learner->buffer().size(), 1u);
  EXPECT_EQ(sim.agents()[1].learner->buffer().size(), 1u);
  const auto& judge = sim.agents()[2].learner->buffer();
  ASSERT_EQ(judge.size(), 2u);
  EXPECT_TRUE(is_judge_state(judge[0].state));
  EXPECT_TRUE(is_judge_state(judge[1].state));
  EXPECT_EQ(judge[0].reward, 0.0);
  EXPECT_EQ(judge[0].next_state, judge[1].state);
}

TEST(Encounter, ExcludedSeedsNeverJudge) {
  SimConfig c;
  c.n_agents = 5;
  c.seed_fraction = 0.4;
  c.mode = JudgingMode::Decentralized;
  c.seed_judging = SeedJudging::Excluded;
  Simulation sim(c);
  for (int k = 0; k < 50; ++k) sim.run_encounter(2, 3);
  EXPECT_EQ(sim.agents()[2].learner->buffer().size(), 50u);
  EXPECT_EQ(sim.agents()[4].learner->buffer().size(), 100u);
}

TEST(Encounter, RandomSeedNormsAreDrawnPerAgent) {
  std::array<int, 16> seen{};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig c;
    c.mode = JudgingMode::Decentralized;
    c.seed_fraction = 0.5;
    c.seed_judging = SeedJudging::RandomNorm;
    c.rng_seed = seed;
    Simulation sim(c);
    for (const AgentSlot& a : sim.agents()) {
      if (a.seeded()) ++seen[a.norm.code];
    }
  }
  int distinct = 0;
  for (int s : seen) distinct += s > 0;
  EXPECT_GE(distinct, 12);
}

TEST(Episode, UniversalCooperation) {
  Simulation sim(all_seeded(15));
  const EpisodeRecord r = sim.run_episode();
  EXPECT_EQ(r.coop_level, 1.0);
  EXPECT_EQ(r.mean_reward, 4.0);
}

TEST(Episode, UniversalDefection) {
  Simulation sim(all_seeded(0));
  EXPECT_EQ(sim.run_episode().coop_level, 0.0);
}

TEST(Episode, DiscriminatorsFromAllGoodStart) {
  Simulation sim(all_seeded(5));
  const std::vector<Reputation> good(10, Reputation::Good);
  EXPECT_EQ(sim.run_episode(good).coop_level, 1.0);
}

TEST(Episode, BuffersClearedAndSeededUnchanged) {
  SimConfig c;
  c.seed_fraction = 0.3;
  c.mode = JudgingMode::Decentralized;
  c.seed_judging = SeedJudging::FixedNorm;
  c.learner.alpha = 0.5;
  Simulation sim(c);
  std::vector<AgentSlot> seeded_before;
  for (const AgentSlot& a : sim.agents()) {
    if (a.seeded()) seeded_before.push_back(a);
  }
  for (int e = 0; e < 50; ++e) sim.run_episode();
  std::size_t k = 0;
  for (const AgentSlot& a : sim.agents()) {
    if (a.seeded()) {
      EXPECT_EQ(a.rule, seeded_before[k].rule);
      EXPECT_EQ(a.norm, seeded_before[k].norm);
      EXPECT_FALSE(a.learner.has_value());
      ++k;
    } else {
      EXPECT_TRUE(a.learner->buffer().empty());
    }
  }
  EXPECT_EQ(k, 3u);
}

TEST(Episode, ClampIsANoOpAndCensusCoversLearners) {
  SimConfig c;
  c.seed_fraction = 0.2;
  c.learner.epsilon = 0.3;
  Simulation sim(c);
  for (int e = 0; e < 200; ++e) {
    const EpisodeRecord r = sim.run_episode();
    EXPECT_EQ(r.coop_level, r.mean_reward / 4.0);
    EXPECT_GE(r.coop_level, 0.0);
    EXPECT_LE(r.coop_level, 1.0);
    EXPECT_EQ(r.census.total(), 8);
    EXPECT_EQ(r.episode_index, static_cast<std::size_t>(e));
  }
}

TEST(RunSimulation, Deterministic) {
  SimConfig c;
  c.episodes = 300;
  c.seed_fraction = 0.2;
  c.learner.alpha = 0.4;
  c.mode = JudgingMode::Decentralized;
  c.rng_seed = 99;
  const SimulationResult a = run_simulation(c);
  const SimulationResult b = run_simulation(c);
  EXPECT_EQ(a.episodes, b.episodes);
  EXPECT_EQ(a.final_tables, b.final_tables);
  EXPECT_EQ(a.summary, b.summary);
  c.rng_seed = 100;
  EXPECT_NE(run_simulation(c).final_tables, a.final_tables);
}

TEST(RunSimulation, ZeroEpisodesHasNoData) {
  SimConfig c;
  c.episodes = 0;
  const SimulationResult r = run_simulation(c);
  EXPECT_TRUE(r.episodes.empty());
  EXPECT_FALSE(r.summary.has_data);
}

TEST(RunSimulation, WindowAveragesTail) {
  SimConfig c;
  c.metric_window = 0.25;
  std::vector<EpisodeRecord> records(10);
  for (std::size_t k = 0; k < 10; ++k) records[k].coop_level = static_cast<double>(k);
  const RunSummary s = summarize(c, records, PolicyCensus{});
  EXPECT_EQ(s.window_episodes, 3u);
  EXPECT_DOUBLE_EQ(s.coop_final, 8.0);
}

TEST(Config, ValidationNamesField) {
  auto field_of = [](SimConfig c) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  SimConfig c;
  EXPECT_EQ(field_of(c), "");
  c.chi = 0.5;
  EXPECT_EQ(field_of(c), "chi");
  c = {};
  c.n_agents = 1;
  EXPECT_EQ(field_of(c), "n_agents");
  c = {};
  c.learner.gamma = 1.0;
  EXPECT_EQ(field_of(c), "learner.gamma");
  c = {};
  c.payoff = {1.0, 2.0};
  EXPECT_EQ(field_of(c), "payoff");
  c = {};
  c.seed_fraction = 1.5;
  EXPECT_EQ(field_of(c), "seed_fraction");
  c = {};
  c.mode = JudgingMode::Decentralized;
  c.n_agents = 2;
  EXPECT_EQ(field_of(c), "n_agents");
  c = {};
  c.mode = JudgingMode::Decentralized;
  c.seed_judging = SeedJudging::Excluded;
  c.seed_fraction = 0.8;
  EXPECT_EQ(field_of(c), "seed_judging");
}

TEST(Config, SeededCountRounds) {
  SimConfig c;
  c.seed_fraction = 0.15;
  EXPECT_EQ(c.seeded_count(), 2u);
  c.seed_fraction = 0.2;
  EXPECT_EQ(c.learner_count(), 8u);
}

TEST(Config, NameParsing) {
  EXPECT_EQ(judging_mode_from("decentralized"), JudgingMode::Decentralized);
  EXPECT_EQ(seed_judging_from("excluded"), SeedJudging::Excluded);
  EXPECT_THROW(judging_mode_from("nope"), ConfigError);
  EXPECT_THROW(seed_judging_from("nope"), ConfigError);
}
