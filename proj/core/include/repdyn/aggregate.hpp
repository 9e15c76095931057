#pragma once

#include <cstddef>
#include <span>

#include "repdyn/analysis.hpp"
#include "repdyn/simulation.hpp"

namespace repdyn {

// Statistics over runs that differ only in rng_seed.
struct SweepSummary {
  std::size_t run_count = 0;
  double mean_coop = 0.0;
  double stddev_coop = 0.0;  // sample standard deviation; 0 for a single run
  double mean_learner_coop = 0.0;
  PolicyCensus pooled;
};

// Throws std::invalid_argument if the runs come from different configurations.
// Runs without data are counted but excluded from the means.
SweepSummary aggregate(std::span<const RunSummary> runs);

}  // namespace repdyn
