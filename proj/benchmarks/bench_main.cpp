#include <benchmark/benchmark.h>

#include "repdyn/simulation.hpp"
#include "repdyn/stability.hpp"

namespace {

using namespace repdyn;

void BM_EpisodeCentralized(benchmark::State& state) {
  SimConfig cfg;
  cfg.seed_fraction = 0.2;
  Simulation sim(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(sim.run_episode());
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.encounters_per_episode));
}
BENCHMARK(BM_EpisodeCentralized);

void BM_EpisodeDecentralized(benchmark::State& state) {
  SimConfig cfg;
  cfg.mode = JudgingMode::Decentralized;
  cfg.seed_fraction = 0.5;
  cfg.learner.alpha = 0.6;
  Simulation sim(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(sim.run_episode());
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.encounters_per_episode));
}
BENCHMARK(BM_EpisodeDecentralized);

void BM_StationarySolve(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stationary_good_fraction(ActionRule(5), SocialNorm(9), 1e-3));
}
BENCHMARK(BM_StationarySolve);

void BM_StabilityScan(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stability_scan(SocialNorm(9), 1e-3, PayoffParams{5, 1}));
}
BENCHMARK(BM_StabilityScan);

void BM_StabilityScanAll(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stability_scan_all(1e-3, PayoffParams{5, 1}));
}
BENCHMARK(BM_StabilityScanAll)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
