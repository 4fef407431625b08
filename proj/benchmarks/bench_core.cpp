#include <benchmark/benchmark.h>

#include "beldec/agents.hpp"
#include "beldec/conditional.hpp"
#include "beldec/game.hpp"
#include "beldec/scoring.hpp"

namespace {

using namespace beldec;

void bm_cost_of_lying(benchmark::State& state) {
  ScoringRule rule = make_quadratic(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(cost_of_lying(rule, 0.1));
}
BENCHMARK(bm_cost_of_lying);

void bm_cost_of_lying_convex(benchmark::State& state) {
  ScoringRule rule = make_random_convex_rule(1.0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(cost_of_lying(rule, 0.1));
}
BENCHMARK(bm_cost_of_lying_convex);

void bm_optimal_report(benchmark::State& state) {
  SingleMechanism mech{make_quadratic(1.0), make_affine_single(0.0, 0.4)};
  RecommenderType type{0.3, 0.5, {}};
  for (auto _ : state) benchmark::DoNotOptimize(optimal_report(mech, type));
}
BENCHMARK(bm_optimal_report);

void bm_mech_epay_decoupled(benchmark::State& state) {
  GameMechanism game = make_decoupled_game({make_quadratic(1.0)}, make_affine_single(0.0, 0.4), 0.25);
  std::vector<double> reports = {0.3};
  for (auto _ : state)
    benchmark::DoNotOptimize(mech_epay(game.randomized, 0, reports, 1));
}
BENCHMARK(bm_mech_epay_decoupled);

void bm_cpm_critical_value(benchmark::State& state) {
  DecisionRule step = make_mean_threshold_step(0.5, 2);
  std::vector<double> others = {0.8};
  for (auto _ : state) benchmark::DoNotOptimize(cpm_critical_value(step, others));
}
BENCHMARK(bm_cpm_critical_value);

void bm_run_games(benchmark::State& state) {
  GameMechanism game = make_plain_game({make_quadratic(1.0)}, make_affine_single(0.0, 0.4));
  std::vector<double> beliefs = {0.3};
  for (auto _ : state)
    benchmark::DoNotOptimize(run_games(game, beliefs, 0.3, {}, 0, state.range(0), 11));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_run_games)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
