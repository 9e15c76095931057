#include "repdyn/experiment.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace repdyn {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t value) { return splitmix64(h ^ splitmix64(value)); }

template <typename T>
std::vector<T> or_base(const std::vector<T>& axis, T base) {
  return axis.empty() ? std::vector<T>{base} : axis;
}

std::string numbered(const char* prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu", prefix, k);
  return buf;
}

// --- JSON field access with named errors -----------------------------------

template <typename T>
T field(const json& value, const std::string& name) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(name, "has the wrong type (got " + std::string(value.type_name()) + ")");
  }
}

std::size_t count_field(const json& value, const std::string& name) {
  if (!value.is_number_integer() && !value.is_number_unsigned()) throw ConfigError(name, "expected an integer");
  const auto v = value.get<long long>();
  if (v < 0) throw ConfigError(name, "must be non-negative");
  return static_cast<std::size_t>(v);
}

int code_field(const json& value, const std::string& name) {
  if (!value.is_number_integer() && !value.is_number_unsigned()) throw ConfigError(name, "expected an integer code");
  const auto v = value.get<long long>();
  if (v < 0 || v > 15) throw ConfigError(name, "code must be in [0, 15]");
  return static_cast<int>(v);
}

void require_object(const json& j, const std::string& name) {
  if (!j.is_object()) throw ConfigError(name, "expected an object");
}

json census_counts(const std::array<long, 16>& counts) {
  json out = json::array();
  for (long c : counts) out.push_back(c);
  return out;
}

json run_json(const RunSummary& run, std::size_t run_index) {
  json j;
  j["run_index"] = run_index;
  j["rng_seed"] = run.config.rng_seed;
  j["has_data"] = run.has_data;
  if (!run.has_data) j["no_data"] = true;
  j["window_episodes"] = run.window_episodes;
  j["coop_final"] = run.coop_final;
  j["learner_coop_final"] = run.learner_coop_final;
  j["dominant_rule"] = run.final_census.dominant_rule();
  j["dominant_norm"] = run.final_census.has_norms ? json(run.final_census.dominant_norm()) : json(nullptr);
  j["census"] = to_json(run.final_census);
  return j;
}

json point_json(const PointResult& point) {
  json j;
  j["point"] = point.point.index;
  j["config"] = to_json(point.point.config);
  j["runs"] = json::array();
  for (std::size_t k = 0; k < point.runs.size(); ++k) j["runs"].push_back(run_json(point.runs[k], k));
  const SweepSummary& s = point.summary;
  j["aggregate"] = {{"run_count", s.run_count},
                    {"mean_coop", s.mean_coop},
                    {"stddev_coop", s.stddev_coop},
                    {"mean_learner_coop", s.mean_learner_coop},
                    {"census", to_json(s.pooled)}};
  return j;
}

std::vector<PointResult> execute(const std::vector<SweepPoint>& points, const std::vector<Job>& jobs,
                                 const std::filesystem::path& out, const RunOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) {
    throw ConfigError("output", "cannot create output directory '" + out.string() + "'");
  }
  for (const SweepPoint& p : points) std::filesystem::create_directories(out / numbered("point", p.index));

  std::vector<RunSummary> summaries(jobs.size());
  parallel_for(jobs.size(), options.workers, [&](std::size_t k) {
    const Job& job = jobs[k];
    SimulationResult result = run_simulation(job.config);
    const auto dir = out / numbered("point", job.point);
    std::ostringstream csv;
    write_episode_csv(csv, result.episodes, job.config.mode == JudgingMode::Decentralized,
                      std::max<std::size_t>(options.thin, 1), result.summary.window_episodes);
    write_file_atomic(dir / (numbered("run", job.run_index) + ".csv"), csv.str());
    if (options.dump_qtables) {
      write_file_atomic(dir / (numbered("run", job.run_index) + "_qtables.json"),
                        qtables_to_json(job.config, result.final_tables).dump(2) + "\n");
    }
    summaries[k] = std::move(result.summary);
  });

  std::vector<PointResult> results(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) results[p].point = points[p];
  for (std::size_t k = 0; k < jobs.size(); ++k) results[jobs[k].point].runs.push_back(summaries[k]);
  for (PointResult& r : results) {
    r.summary = aggregate(r.runs);
    write_file_atomic(out / numbered("point", r.point.index) / "summary.json", point_json(r).dump(2) + "\n");
  }
  std::ostringstream sweep;
  write_sweep_csv(sweep, results);
  write_file_atomic(out / "sweep.csv", sweep.str());
  return results;
}

}  // namespace

std::vector<SweepPoint> expand_points(const ExperimentSpec& spec) {
  std::vector<SweepPoint> points;
  const SimConfig& base = spec.base;
  for (double b : or_base(spec.sweep.b, base.payoff.b)) {
    for (double sf : or_base(spec.sweep.seed_fraction, base.seed_fraction)) {
      for (double alpha : or_base(spec.sweep.alpha, base.learner.alpha)) {
        for (int norm : or_base(spec.sweep.norm, static_cast<int>(base.norm.code))) {
          for (JudgingMode mode : or_base(spec.sweep.mode, base.mode)) {
            SweepPoint point;
            point.index = points.size();
            point.config = base;
            point.config.payoff.b = b;
            point.config.seed_fraction = sf;
            point.config.learner.alpha = alpha;
            point.config.norm = SocialNorm(norm);
            point.config.mode = mode;
            points.push_back(point);
          }
        }
      }
    }
  }
  return points;
}

std::uint64_t derive_seed(std::uint64_t base_seed, const SimConfig& point, std::size_t run_index) {
  std::uint64_t h = splitmix64(base_seed);
  h = mix(h, std::bit_cast<std::uint64_t>(point.payoff.b));
  h = mix(h, std::bit_cast<std::uint64_t>(point.seed_fraction));
  h = mix(h, std::bit_cast<std::uint64_t>(point.learner.alpha));
  h = mix(h, point.norm.code);
  h = mix(h, static_cast<std::uint64_t>(point.mode));
  return mix(h, run_index);
}

std::vector<Job> expand_jobs(const ExperimentSpec& spec) {
  std::vector<Job> jobs;
  for (const SweepPoint& point : expand_points(spec)) {
    for (std::size_t run = 0; run < spec.runs_per_point; ++run) {
      Job job{point.index, run, point.config};
      job.config.rng_seed = derive_seed(spec.base.rng_seed, point.config, run);
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < count && !failed; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<SimulationResult> run_all(std::span<const SimConfig> configs, std::size_t workers) {
  std::vector<SimulationResult> results(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t k) { results[k] = run_simulation(configs[k]); });
  return results;
}

std::vector<PointResult> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  if (spec.runs_per_point == 0) throw ConfigError("runs_per_point", "must be positive");
  const auto points = expand_points(spec);
  for (const SweepPoint& p : points) p.config.validate();
  return execute(points, expand_jobs(spec), spec.output, options);
}

PointResult run_single(const SimConfig& config, const std::filesystem::path& out, const RunOptions& options) {
  config.validate();
  const std::vector<SweepPoint> points{SweepPoint{0, config}};
  const std::vector<Job> jobs{Job{0, 0, config}};
  return execute(points, jobs, out, options).front();
}

// --- JSON --------------------------------------------------------------------

json to_json(const SimConfig& c) {
  return json{{"n_agents", c.n_agents},
              {"episodes", c.episodes},
              {"encounters_per_episode", c.encounters_per_episode},
              {"payoff", {{"b", c.payoff.b}, {"c", c.payoff.c}}},
              {"chi", c.chi},
              {"learner",
               {{"beta", c.learner.beta},
                {"gamma", c.learner.gamma},
                {"epsilon", c.learner.epsilon},
                {"alpha", c.learner.alpha}}},
              {"seed_fraction", c.seed_fraction},
              {"mode", to_string(c.mode)},
              {"norm", c.norm.code},
              {"seed_rule", c.seed_rule.code},
              {"seed_norm", c.seed_norm.code},
              {"seed_judging", to_string(c.seed_judging)},
              {"rng_seed", c.rng_seed},
              {"metric_window", c.metric_window}};
}

SimConfig sim_config_from_json(const json& j, SimConfig c) {
  require_object(j, "base");
  for (const auto& [key, value] : j.items()) {
    if (key == "n_agents") {
      c.n_agents = count_field(value, key);
    } else if (key == "episodes") {
      c.episodes = count_field(value, key);
    } else if (key == "encounters_per_episode") {
      c.encounters_per_episode = count_field(value, key);
    } else if (key == "payoff") {
      require_object(value, key);
      for (const auto& [pk, pv] : value.items()) {
        if (pk == "b") c.payoff.b = field<double>(pv, "payoff.b");
        else if (pk == "c") c.payoff.c = field<double>(pv, "payoff.c");
        else throw ConfigError("payoff." + pk, "unknown field");
      }
    } else if (key == "chi") {
      c.chi = field<double>(value, key);
    } else if (key == "learner") {
      require_object(value, key);
      for (const auto& [lk, lv] : value.items()) {
        const std::string name = "learner." + lk;
        if (lk == "beta") c.learner.beta = field<double>(lv, name);
        else if (lk == "gamma") c.learner.gamma = field<double>(lv, name);
        else if (lk == "epsilon") c.learner.epsilon = field<double>(lv, name);
        else if (lk == "alpha") c.learner.alpha = field<double>(lv, name);
        else throw ConfigError(name, "unknown field");
      }
    } else if (key == "seed_fraction") {
      c.seed_fraction = field<double>(value, key);
    } else if (key == "mode") {
      c.mode = judging_mode_from(field<std::string>(value, key));
    } else if (key == "norm") {
      c.norm = SocialNorm(code_field(value, key));
    } else if (key == "seed_rule") {
      c.seed_rule = ActionRule(code_field(value, key));
    } else if (key == "seed_norm") {
      c.seed_norm = SocialNorm(code_field(value, key));
    } else if (key == "seed_judging") {
      c.seed_judging = seed_judging_from(field<std::string>(value, key));
    } else if (key == "rng_seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) throw ConfigError(key, "expected an integer");
      c.rng_seed = value.get<std::uint64_t>();
    } else if (key == "metric_window") {
      c.metric_window = field<double>(value, key);
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  return c;
}

json to_json(const ExperimentSpec& spec) {
  json sweep = json::object();
  if (!spec.sweep.b.empty()) sweep["b"] = spec.sweep.b;
  if (!spec.sweep.seed_fraction.empty()) sweep["seed_fraction"] = spec.sweep.seed_fraction;
  if (!spec.sweep.alpha.empty()) sweep["alpha"] = spec.sweep.alpha;
  if (!spec.sweep.norm.empty()) sweep["norm"] = spec.sweep.norm;
  if (!spec.sweep.mode.empty()) {
    sweep["mode"] = json::array();
    for (JudgingMode m : spec.sweep.mode) sweep["mode"].push_back(to_string(m));
  }
  return json{{"base", to_json(spec.base)},
              {"sweep", sweep},
              {"runs_per_point", spec.runs_per_point},
              {"output", spec.output.string()}};
}

ExperimentSpec experiment_from_json(const json& j) {
  require_object(j, "config");
  ExperimentSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "base") {
      spec.base = sim_config_from_json(value);
    } else if (key == "sweep") {
      require_object(value, key);
      for (const auto& [axis, list] : value.items()) {
        const std::string name = "sweep." + axis;
        if (!list.is_array()) throw ConfigError(name, "expected a list");
        if (axis == "b") spec.sweep.b = field<std::vector<double>>(list, name);
        else if (axis == "seed_fraction") spec.sweep.seed_fraction = field<std::vector<double>>(list, name);
        else if (axis == "alpha") spec.sweep.alpha = field<std::vector<double>>(list, name);
        else if (axis == "norm") {
          for (const json& v : list) spec.sweep.norm.push_back(code_field(v, name));
        } else if (axis == "mode") {
          for (const json& v : list) spec.sweep.mode.push_back(judging_mode_from(field<std::string>(v, name)));
        } else {
          throw ConfigError(name, "unknown sweep axis");
        }
      }
    } else if (key == "runs_per_point") {
      spec.runs_per_point = count_field(value, key);
    } else if (key == "output") {
      spec.output = field<std::string>(value, key);
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return experiment_from_json(j);
}

json to_json(const PolicyCensus& census) {
  json j{{"rule_counts", census_counts(census.rule_counts)}, {"unconverged_count", census.unconverged_count}};
  j["norm_counts"] = census.has_norms ? census_counts(census.norm_counts) : json(nullptr);
  return j;
}

json to_json(const QTable& q) {
  json rows = json::array();
  for (StateId s = 0; s < kNumStates; ++s) {
    if (q.contains(s)) rows.push_back({q.at(s, 0), q.at(s, 1)});
  }
  return rows;
}

QTable qtable_from_json(const json& j) {
  if (!j.is_array() || (j.size() != 4 && j.size() != 8)) {
    throw std::invalid_argument("Q-table must be a list of 4 (play) or 8 (play + judge) rows");
  }
  QTable q(j.size() == 8);
  for (StateId s = 0; s < j.size(); ++s) {
    const json& row = j[s];
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
      throw std::invalid_argument("Q-table row " + std::to_string(s) + " must hold two numbers");
    }
    q.at(s, 0) = row[0].get<double>();
    q.at(s, 1) = row[1].get<double>();
  }
  return q;
}

json qtables_to_json(const SimConfig& config, std::span<const QTable> tables) {
  json j{{"mode", to_string(config.mode)}, {"rng_seed", config.rng_seed}, {"tables", json::array()}};
  for (const QTable& q : tables) j["tables"].push_back(to_json(q));
  return j;
}

std::vector<QTable> qtables_from_json(const json& j) {
  if (!j.is_object() || !j.contains("tables") || !j["tables"].is_array()) {
    throw std::invalid_argument("Q-table dump must be an object with a 'tables' list");
  }
  std::vector<QTable> tables;
  for (const json& t : j["tables"]) tables.push_back(qtable_from_json(t));
  return tables;
}

// --- CSV -----------------------------------------------------------------------

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_episode_csv(std::ostream& out, std::span<const EpisodeRecord> episodes, bool with_norms,
                       std::size_t thin, std::size_t window) {
  out << "episode,mean_reward,coop_level";
  for (int k = 0; k < 16; ++k) out << ",rule_census_" << k;
  if (with_norms) {
    for (int k = 0; k < 16; ++k) out << ",norm_census_" << k;
  }
  out << '\n';
  const std::size_t tail_start = episodes.size() - std::min(window, episodes.size());
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    if (e % thin != 0 && e < tail_start) continue;
    const EpisodeRecord& r = episodes[e];
    out << r.episode_index << ',' << format_number(r.mean_reward) << ',' << format_number(r.coop_level);
    for (long c : r.census.rule_counts) out << ',' << c;
    if (with_norms) {
      for (long c : r.census.norm_counts) out << ',' << c;
    }
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const PointResult> points) {
  out << kSweepCsvHeader << '\n';
  for (const PointResult& point : points) {
    const SimConfig& c = point.point.config;
    const bool centralized = c.mode == JudgingMode::Centralized;
    for (std::size_t k = 0; k < point.runs.size(); ++k) {
      const RunSummary& run = point.runs[k];
      out << format_number(c.payoff.b) << ',' << format_number(c.seed_fraction) << ','
          << format_number(c.learner.alpha) << ',';
      if (centralized) out << int(c.norm.code);
      out << ',' << to_string(c.mode) << ',' << k << ',';
      if (run.has_data) out << format_number(run.coop_final);
      out << ',' << run.final_census.dominant_rule() << ',';
      if (run.final_census.has_norms) out << run.final_census.dominant_norm();
      out << '\n';
    }
  }
}

void write_stability_csv(std::ostream& out, std::span<const StabilityVerdict> verdicts) {
  out << "norm,resident_rule,good_fraction,resident_payoff,worst_mutant,worst_mutant_payoff,stable,"
         "weakly_stable,classification,converged\n";
  for (const StabilityVerdict& v : verdicts) {
    out << int(v.norm.code) << ',' << int(v.resident_rule.code) << ',' << format_number(v.good_fraction) << ','
        << format_number(v.resident_payoff) << ',' << int(v.worst_mutant.code) << ','
        << format_number(v.worst_mutant_payoff) << ',' << (v.stable ? "true" : "false") << ','
        << (v.weakly_stable ? "true" : "false") << ',' << to_string(v.classification()) << ','
        << (v.converged ? "true" : "false") << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace repdyn
