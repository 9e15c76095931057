#pragma once

// Experiment specs, job expansion with reproducible per-job seeds, a worker
// pool across independent runs, and the CSV/JSON result files.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repdyn/aggregate.hpp"
#include "repdyn/simulation.hpp"
#include "repdyn/stability.hpp"

namespace repdyn {

struct SweepAxes {
  std::vector<double> b;
  std::vector<double> seed_fraction;
  std::vector<double> alpha;
  std::vector<int> norm;
  std::vector<JudgingMode> mode;
};

struct ExperimentSpec {
  SimConfig base;
  SweepAxes sweep;
  std::size_t runs_per_point = 20;
  std::filesystem::path output = "results";
};

// One cell of the cartesian product of the sweep axes. Axes left empty take
// the base value.
struct SweepPoint {
  std::size_t index = 0;
  SimConfig config;  // rng_seed is the base seed; jobs derive their own
};

struct Job {
  std::size_t point = 0;
  std::size_t run_index = 0;
  SimConfig config;
};

std::vector<SweepPoint> expand_points(const ExperimentSpec& spec);

// Mixes the base seed with a point's axis values and the run index, so a job's
// seed does not depend on enumeration order.
std::uint64_t derive_seed(std::uint64_t base_seed, const SimConfig& point, std::size_t run_index);

std::vector<Job> expand_jobs(const ExperimentSpec& spec);

// Runs fn(k) for k in [0, count) on `workers` threads (0 = hardware concurrency).
// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

std::vector<SimulationResult> run_all(std::span<const SimConfig> configs, std::size_t workers);

struct RunOptions {
  std::size_t workers = 0;
  std::size_t thin = 1;        // keep every Nth episode plus the final metric window
  bool dump_qtables = false;
};

struct PointResult {
  SweepPoint point;
  std::vector<RunSummary> runs;
  SweepSummary summary;
};

// Executes every job and writes:
//   <out>/sweep.csv
//   <out>/point_NNN/summary.json
//   <out>/point_NNN/run_NNN.csv           (one per run)
//   <out>/point_NNN/run_NNN_qtables.json  (with dump_qtables)
std::vector<PointResult> run_experiment(const ExperimentSpec& spec, const RunOptions& options);

// Runs one configuration with config.rng_seed used as-is.
PointResult run_single(const SimConfig& config, const std::filesystem::path& out, const RunOptions& options);

// JSON mapping. Field names mirror the struct members; unknown keys and bad
// values raise ConfigError naming the field.
nlohmann::json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j, SimConfig defaults = {});
nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_from_json(const nlohmann::json& j);
ExperimentSpec load_experiment(const std::filesystem::path& path);

nlohmann::json to_json(const PolicyCensus& census);
nlohmann::json to_json(const QTable& q);
QTable qtable_from_json(const nlohmann::json& j);
nlohmann::json qtables_to_json(const SimConfig& config, std::span<const QTable> tables);
std::vector<QTable> qtables_from_json(const nlohmann::json& j);

// Shortest decimal text that round-trips the double.
std::string format_number(double value);

void write_episode_csv(std::ostream& out, std::span<const EpisodeRecord> episodes, bool with_norms,
                       std::size_t thin, std::size_t window);
inline constexpr const char* kSweepCsvHeader =
    "b,seed_fraction,alpha,norm,mode,run_index,coop_final,dominant_rule,dominant_norm";
void write_sweep_csv(std::ostream& out, std::span<const PointResult> points);
void write_stability_csv(std::ostream& out, std::span<const StabilityVerdict> verdicts);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace repdyn
