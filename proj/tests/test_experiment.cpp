#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "repdyn/experiment.hpp"

using namespace repdyn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(REPDYN_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

ExperimentSpec small_spec(const fs::path& out) {
  ExperimentSpec spec;
  spec.base.episodes = 30;
  spec.base.encounters_per_episode = 50;
  spec.base.rng_seed = 7;
  spec.sweep.b = {2.0, 5.0};
  spec.sweep.seed_fraction = {0.0, 0.2};
  spec.runs_per_point = 3;
  spec.output = out;
  return spec;
}

std::string config_error_field(const nlohmann::json& j) {
  try {
    experiment_from_json(j).base.validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Expand, CartesianProduct) {
  ExperimentSpec spec;
  spec.sweep.b = {2, 5, 10};
  spec.sweep.seed_fraction = {0, 0.2};
  spec.sweep.alpha = {0, 0.6};
  const auto points = expand_points(spec);
  ASSERT_EQ(points.size(), 12u);
  EXPECT_EQ(points[0].config.payoff.b, 2.0);
  EXPECT_EQ(points[1].config.learner.alpha, 0.6);
  EXPECT_EQ(points[2].config.seed_fraction, 0.2);
  EXPECT_EQ(points[11].config.payoff.b, 10.0);
  spec.runs_per_point = 4;
  EXPECT_EQ(expand_jobs(spec).size(), 48u);
}

TEST(Expand, EmptyAxesUseBase) {
  ExperimentSpec spec;
  spec.base.learner.alpha = 0.3;
  const auto points = expand_points(spec);
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].config, spec.base);
}

TEST(Expand, SeedsAreDistinctAndOrderIndependent) {
  ExperimentSpec spec;
  spec.sweep.b = {2, 5};
  spec.sweep.alpha = {0, 0.5};
  spec.runs_per_point = 10;
  std::set<std::uint64_t> seeds;
  for (const Job& job : expand_jobs(spec)) seeds.insert(job.config.rng_seed);
  EXPECT_EQ(seeds.size(), 40u);

  ExperimentSpec reordered = spec;
  reordered.sweep.b = {5, 2};
  const auto a = expand_jobs(spec);
  const auto b = expand_jobs(reordered);
  EXPECT_EQ(a[0].config.rng_seed, b[20].config.rng_seed);
}

TEST(ParallelFor, VisitsEveryIndexOnceAndPropagatesErrors) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t k) { ++hits[k]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t k) {
                 if (k == 5) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(RunExperiment, WritesExpectedFiles) {
  const fs::path out = scratch("layout");
  ExperimentSpec spec = small_spec(out);
  const auto results = run_experiment(spec, RunOptions{2, 1, true});
  ASSERT_EQ(results.size(), 4u);
  EXPECT_TRUE(fs::exists(out / "sweep.csv"));
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(out)) files += entry.is_regular_file();
  EXPECT_EQ(files, 1u + 4u * (1u + 3u * 2u));
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    EXPECT_NE(entry.path().extension(), ".tmp");
  }

  const std::string sweep = slurp(out / "sweep.csv");
  EXPECT_EQ(first_line(sweep), kSweepCsvHeader);
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 13);

  const std::string run = slurp(out / "point_000" / "run_000.csv");
  std::string expected = "episode,mean_reward,coop_level";
  for (int k = 0; k < 16; ++k) expected += ",rule_census_" + std::to_string(k);
  EXPECT_EQ(first_line(run), expected);
  EXPECT_EQ(std::count(run.begin(), run.end(), '\n'), 31);

  const auto summary = nlohmann::json::parse(slurp(out / "point_003" / "summary.json"));
  EXPECT_EQ(summary["runs"].size(), 3u);
  EXPECT_EQ(summary["config"]["seed_fraction"], 0.2);
  EXPECT_EQ(summary["aggregate"]["run_count"], 3);

  const auto dump = nlohmann::json::parse(slurp(out / "point_003" / "run_002_qtables.json"));
  EXPECT_EQ(qtables_from_json(dump).size(), 8u);
}

TEST(RunExperiment, OutputIndependentOfWorkerCount) {
  const fs::path one = scratch("workers1");
  const fs::path many = scratch("workers4");
  ExperimentSpec spec = small_spec(one);
  spec.base.mode = JudgingMode::Decentralized;
  spec.base.learner.alpha = 0.5;
  run_experiment(spec, RunOptions{1, 1, true});
  spec.output = many;
  run_experiment(spec, RunOptions{4, 1, true});
  for (const auto& entry : fs::recursive_directory_iterator(one)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), one);
    EXPECT_EQ(slurp(entry.path()), slurp(many / rel)) << rel;
  }
}

TEST(RunExperiment, DecentralizedColumns) {
  const fs::path out = scratch("decentral");
  SimConfig c;
  c.mode = JudgingMode::Decentralized;
  c.episodes = 10;
  run_single(c, out, RunOptions{});
  const std::string run = slurp(out / "point_000" / "run_000.csv");
  EXPECT_NE(first_line(run).find(",norm_census_15"), std::string::npos);
  const std::string sweep = slurp(out / "sweep.csv");
  const std::string row = sweep.substr(sweep.find('\n') + 1);
  EXPECT_EQ(row.substr(0, row.find(",decentralized")), "5,0,0,");  // norm column empty
  EXPECT_NE(row.back() == '\n' ? row[row.size() - 2] : row.back(), ',');
}

TEST(RunExperiment, ThinningKeepsTail) {
  SimConfig c;
  c.episodes = 100;
  c.encounters_per_episode = 20;
  const SimulationResult r = run_simulation(c);
  std::ostringstream csv;
  write_episode_csv(csv, r.episodes, false, 10, r.summary.window_episodes);
  const std::string text = csv.str();
  // 50 head episodes thinned to every 10th (5 rows) plus the 50-episode window.
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 5 + 50);
}

TEST(RunExperiment, ZeroEpisodesFlagged) {
  const fs::path out = scratch("empty");
  SimConfig c;
  c.episodes = 0;
  const PointResult r = run_single(c, out, RunOptions{});
  EXPECT_FALSE(r.runs.front().has_data);
  const auto summary = nlohmann::json::parse(slurp(out / "point_000" / "summary.json"));
  EXPECT_EQ(summary["runs"][0]["no_data"], true);
}

TEST(RunExperiment, InvalidPointRejectedBeforeRunning) {
  const fs::path out = scratch("invalid") / "nested";
  ExperimentSpec spec;
  spec.sweep.alpha = {0.5, 2.0};
  spec.output = out;
  try {
    run_experiment(spec, RunOptions{});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "learner.alpha");
  }
  EXPECT_FALSE(fs::exists(out));
}

TEST(ConfigJson, RoundTrip) {
  ExperimentSpec spec;
  spec.base.payoff.b = 10;
  spec.base.learner.alpha = 0.6;
  spec.base.mode = JudgingMode::Decentralized;
  spec.base.seed_judging = SeedJudging::Excluded;
  spec.base.rng_seed = 0xFFFFFFFFFFFFFFFFull;
  spec.sweep.norm = {0, 9};
  spec.sweep.mode = {JudgingMode::Centralized};
  spec.runs_per_point = 5;
  spec.output = "out/dir";
  const ExperimentSpec back = experiment_from_json(nlohmann::json::parse(to_json(spec).dump()));
  EXPECT_EQ(back.base, spec.base);
  EXPECT_EQ(back.sweep.norm, spec.sweep.norm);
  EXPECT_EQ(back.sweep.mode, spec.sweep.mode);
  EXPECT_EQ(back.runs_per_point, 5u);
  EXPECT_EQ(back.output, spec.output);
}

TEST(ConfigJson, PartialFilesKeepDefaults) {
  const auto spec = experiment_from_json(nlohmann::json::parse(R"({"base": {"learner": {"alpha": 0.2}}})"));
  SimConfig expected;
  expected.learner.alpha = 0.2;
  EXPECT_EQ(spec.base, expected);
}

TEST(ConfigJson, ErrorsNameTheField) {
  using nlohmann::json;
  EXPECT_EQ(config_error_field(json::parse(R"({"base": {"chi": 0.7}})")), "chi");
  EXPECT_EQ(config_error_field(json::parse(R"({"base": {"chi": "high"}})")), "chi");
  EXPECT_EQ(config_error_field(json::parse(R"({"base": {"learner": {"beta": 0}}})")), "learner.beta");
  EXPECT_EQ(config_error_field(json::parse(R"({"base": {"learner": {"lr": 0.1}}})")), "learner.lr");
  EXPECT_EQ(config_error_field(json::parse(R"({"base": {"norm": 16}})")), "norm");
  EXPECT_EQ(config_error_field(json::parse(R"({"base": {"n_agents": -3}})")), "n_agents");
  EXPECT_EQ(config_error_field(json::parse(R"({"base": {"mode": "mixed"}})")), "mode");
  EXPECT_EQ(config_error_field(json::parse(R"({"sweep": {"b": 5}})")), "sweep.b");
  EXPECT_EQ(config_error_field(json::parse(R"({"sweep": {"gamma": [0.9]}})")), "sweep.gamma");
  EXPECT_EQ(config_error_field(json::parse(R"({"bogus": 1})")), "bogus");
}

TEST(ConfigJson, LoadReportsMissingAndMalformedFiles) {
  const fs::path dir = scratch("load");
  try {
    load_experiment(dir / "missing.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "config");
  }
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_experiment(dir / "bad.json"), ConfigError);
}

TEST(QTableJson, RoundTripAndValidation) {
  QTable q(true);
  q.at(0, 1) = 0.125;
  q.at(7, 0) = -3.5;
  EXPECT_EQ(qtable_from_json(to_json(q)), q);
  QTable p;
  p.at(3, 1) = 1e-17;
  EXPECT_EQ(qtable_from_json(nlohmann::json::parse(to_json(p).dump())), p);
  EXPECT_THROW(qtable_from_json(nlohmann::json::parse("[[1,2],[3,4],[5,6]]")), std::invalid_argument);
  EXPECT_THROW(qtable_from_json(nlohmann::json::parse("[[1],[3,4],[5,6],[7,8]]")), std::invalid_argument);
}

TEST(StabilityCsv, Schema) {
  std::ostringstream csv;
  const auto scan = stability_scan(SocialNorm(9), 1e-3, PayoffParams{5, 1});
  write_stability_csv(csv, scan);
  const std::string text = csv.str();
  EXPECT_EQ(first_line(text),
            "norm,resident_rule,good_fraction,resident_payoff,worst_mutant,worst_mutant_payoff,stable,"
            "weakly_stable,classification,converged");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(5.0), "5");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}
