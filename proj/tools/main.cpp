// repdyn: run reputation-dynamics simulations, parameter sweeps, the stability
// scan, and policy censuses of dumped Q-tables.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include "repdyn/experiment.hpp"
#include "repdyn/stability.hpp"

namespace {

using nlohmann::json;
using namespace repdyn;

template <typename Code>
Code checked_code(int value, const char* name) {
  try {
    return Code(value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name, e.what());
  }
}

// Command-line overrides for SimConfig fields; unset flags leave the file value.
struct Overrides {
  std::optional<std::size_t> n_agents, episodes, encounters, runs_per_point;
  std::optional<double> b, c, chi, beta, gamma, epsilon, alpha, seed_fraction, metric_window;
  std::optional<std::string> mode, seed_judging;
  std::optional<int> norm, seed_rule, seed_norm;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App& app) {
    app.add_option("--seed", seed, "Base RNG seed");
    app.add_option("--n-agents", n_agents, "Population size");
    app.add_option("--episodes", episodes, "Episodes per run");
    app.add_option("--encounters", encounters, "Encounters per episode");
    app.add_option("--b", b, "Benefit of cooperation");
    app.add_option("--c", c, "Cost of cooperation");
    app.add_option("--chi", chi, "Reputation assignment error");
    app.add_option("--beta", beta, "Learning rate");
    app.add_option("--gamma", gamma, "Discount factor");
    app.add_option("--epsilon", epsilon, "Exploration probability");
    app.add_option("--alpha", alpha, "Introspection weight");
    app.add_option("--seed-fraction", seed_fraction, "Fraction of seeded agents");
    app.add_option("--mode", mode, "centralized | decentralized");
    app.add_option("--norm", norm, "Enforced social norm (centralized)");
    app.add_option("--seed-rule", seed_rule, "Action rule of seeded agents");
    app.add_option("--seed-norm", seed_norm, "Norm seeded agents judge with");
    app.add_option("--seed-judging", seed_judging, "norm | random | excluded");
    app.add_option("--metric-window", metric_window, "Fraction of final episodes averaged");
  }

  void apply(SimConfig& cfg) const {
    if (seed) cfg.rng_seed = *seed;
    if (n_agents) cfg.n_agents = *n_agents;
    if (episodes) cfg.episodes = *episodes;
    if (encounters) cfg.encounters_per_episode = *encounters;
    if (b) cfg.payoff.b = *b;
    if (c) cfg.payoff.c = *c;
    if (chi) cfg.chi = *chi;
    if (beta) cfg.learner.beta = *beta;
    if (gamma) cfg.learner.gamma = *gamma;
    if (epsilon) cfg.learner.epsilon = *epsilon;
    if (alpha) cfg.learner.alpha = *alpha;
    if (seed_fraction) cfg.seed_fraction = *seed_fraction;
    if (mode) cfg.mode = judging_mode_from(*mode);
    if (norm) cfg.norm = checked_code<SocialNorm>(*norm, "norm");
    if (seed_rule) cfg.seed_rule = checked_code<ActionRule>(*seed_rule, "seed_rule");
    if (seed_norm) cfg.seed_norm = checked_code<SocialNorm>(*seed_norm, "seed_norm");
    if (seed_judging) cfg.seed_judging = seed_judging_from(*seed_judging);
    if (metric_window) cfg.metric_window = *metric_window;
  }

};

struct OutputFlags {
  std::string config;
  std::string out;
  std::size_t workers = 0;
  std::size_t thin = 1;
  bool dump_qtables = false;

  void add_to(CLI::App& app, bool config_required) {
    auto* opt = app.add_option("--config", config, "Experiment config (JSON)");
    if (config_required) opt->required();
    app.add_option("--out", out, "Output directory");
    app.add_option("--workers", workers, "Worker threads (0 = all cores)");
    app.add_option("--thin", thin, "Keep every Nth episode plus the final window")->check(CLI::PositiveNumber);
    app.add_flag("--dump-qtables", dump_qtables, "Write final learner Q-tables as JSON");
  }

  RunOptions options() const { return RunOptions{workers, thin, dump_qtables}; }
};

int report_error(const std::string& kind, const std::string& field, const std::string& message, int status) {
  json err{{"kind", kind}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << json{{"error", err}}.dump() << '\n';
  return status;
}

ExperimentSpec spec_from(const OutputFlags& flags) {
  ExperimentSpec spec = flags.config.empty() ? ExperimentSpec{} : load_experiment(flags.config);
  if (!flags.out.empty()) spec.output = flags.out;
  return spec;
}

void print_point(const PointResult& r) {
  const SimConfig& c = r.point.config;
  std::cout << "point " << r.point.index << ": b=" << format_number(c.payoff.b)
            << " seed_fraction=" << format_number(c.seed_fraction) << " alpha=" << format_number(c.learner.alpha)
            << " mode=" << to_string(c.mode) << " runs=" << r.summary.run_count
            << " coop_final=" << format_number(r.summary.mean_coop) << " sd=" << format_number(r.summary.stddev_coop)
            << " dominant_rule=" << r.summary.pooled.dominant_rule();
  if (r.summary.pooled.has_norms) std::cout << " dominant_norm=" << r.summary.pooled.dominant_norm();
  std::cout << '\n';
}

int run_stability(const std::string& norm_arg, double chi, double b, double c, const std::string& out) {
  const PayoffParams params{b, c};
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("payoff", e.what());
  }
  if (!(chi >= 0.0 && chi < 0.5)) throw ConfigError("chi", "must be in [0, 0.5)");
  std::vector<StabilityVerdict> verdicts;
  if (norm_arg == "all" || norm_arg == "ALL") {
    verdicts = stability_scan_all(chi, params);
  } else {
    int code = -1;
    try {
      std::size_t used = 0;
      code = std::stoi(norm_arg, &used);
      if (used != norm_arg.size()) code = -1;
    } catch (const std::exception&) {
    }
    if (code < 0 || code > 15) throw ConfigError("norm", "expected a code in [0, 15] or 'all'");
    verdicts = stability_scan(SocialNorm(code), chi, params);
  }
  std::ostringstream csv;
  write_stability_csv(csv, verdicts);
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_file_atomic(out, csv.str());
  }
  return 0;
}

int run_census(const std::vector<std::string>& inputs, const std::string& out) {
  PolicyCensus pooled;
  json files = json::array();
  for (const std::string& path : inputs) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    const auto tables = qtables_from_json(json::parse(in));
    const PolicyCensus census = take_census(tables);
    files.push_back({{"path", path}, {"learners", tables.size()}, {"census", to_json(census)}});
    pooled += census;
  }
  json result{{"files", files},
              {"pooled", to_json(pooled)},
              {"dominant_rule", pooled.dominant_rule()},
              {"dominant_norm", pooled.has_norms ? json(pooled.dominant_norm()) : json(nullptr)}};
  if (out.empty()) {
    std::cout << result.dump(2) << '\n';
  } else {
    write_file_atomic(out, result.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reputation dynamics with Q-learning agents in the Prisoner's Dilemma"};
  app.require_subcommand(1);

  Overrides run_over, sweep_over;
  OutputFlags run_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "Single simulation run");
  run_flags.add_to(*run, false);
  run_over.add_to(*run);

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep over an experiment spec");
  sweep_flags.add_to(*sweep, true);
  sweep_over.add_to(*sweep);
  sweep->add_option("--runs-per-point", sweep_over.runs_per_point, "Runs per sweep point");

  std::string stab_norm = "9", stab_out;
  double stab_chi = 1e-3, stab_b = 5.0, stab_c = 1.0;
  auto* stability = app.add_subcommand("stability", "Stability scan of (action rule, norm) pairs as CSV");
  stability->add_option("--norm", stab_norm, "Norm code or 'all'");
  stability->add_option("--chi", stab_chi, "Reputation assignment error");
  stability->add_option("--b", stab_b, "Benefit of cooperation");
  stability->add_option("--c", stab_c, "Cost of cooperation");
  stability->add_option("--out", stab_out, "Output CSV file (default stdout)");

  std::vector<std::string> census_inputs;
  std::string census_out;
  auto* census = app.add_subcommand("census", "Policy census of Q-table dumps");
  census->add_option("inputs", census_inputs, "Q-table dump files")->required();
  census->add_option("--out", census_out, "Output JSON file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentSpec spec = spec_from(run_flags);
      run_over.apply(spec.base);
      const PointResult result = run_single(spec.base, spec.output, run_flags.options());
      print_point(result);
      if (!result.runs.front().has_data) std::cout << "no data (zero episodes)\n";
    } else if (*sweep) {
      ExperimentSpec spec = spec_from(sweep_flags);
      sweep_over.apply(spec.base);
      if (sweep_over.runs_per_point) spec.runs_per_point = *sweep_over.runs_per_point;
      for (const PointResult& r : run_experiment(spec, sweep_flags.options())) print_point(r);
    } else if (*stability) {
      return run_stability(stab_norm, stab_chi, stab_b, stab_c, stab_out);
    } else if (*census) {
      return run_census(census_inputs, census_out);
    }
  } catch (const ConfigError& e) {
    return report_error("config", e.field(), e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return report_error("invalid_argument", "", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("runtime", "", e.what(), 1);
  }
  return 0;
}
