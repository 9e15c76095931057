#include "repdyn/aggregate.hpp"

#include <cmath>
#include <stdexcept>

namespace repdyn {

namespace {

SimConfig without_seed(SimConfig config) {
  config.rng_seed = 0;
  return config;
}

}  // namespace

SweepSummary aggregate(std::span<const RunSummary> runs) {
  SweepSummary summary;
  summary.run_count = runs.size();
  if (runs.empty()) return summary;

  const SimConfig reference = without_seed(runs.front().config);
  // Accumulate around the first data point so identical runs give exactly zero spread.
  double shift = 0.0;
  double sum = 0.0;
  double learner_sum = 0.0;
  std::size_t with_data = 0;
  for (const RunSummary& run : runs) {
    if (!(without_seed(run.config) == reference)) {
      throw std::invalid_argument("aggregate: runs mix different configurations");
    }
    summary.pooled += run.final_census;
    if (!run.has_data) continue;
    if (with_data == 0) shift = run.coop_final;
    sum += run.coop_final - shift;
    learner_sum += run.learner_coop_final;
    ++with_data;
  }
  if (with_data == 0) return summary;
  const double offset = sum / static_cast<double>(with_data);
  summary.mean_coop = shift + offset;
  summary.mean_learner_coop = learner_sum / static_cast<double>(with_data);
  if (with_data > 1) {
    double squares = 0.0;
    for (const RunSummary& run : runs) {
      if (!run.has_data) continue;
      const double d = run.coop_final - shift - offset;
      squares += d * d;
    }
    summary.stddev_coop = std::sqrt(squares / static_cast<double>(with_data - 1));
  }
  return summary;
}

}  // namespace repdyn
