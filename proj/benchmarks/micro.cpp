#include <benchmark/benchmark.h>

#include "pushplan/actions.hpp"
#include "pushplan/bench.hpp"
#include "pushplan/pmbs.hpp"
#include "pushplan/push_sim.hpp"

using namespace pushplan;

namespace {

WorldState scene(int n, uint64_t seed) { return bench::generate_case(n, {}, seed); }

void BM_ResolvePush(benchmark::State& state) {
  const WorldState s = scene(static_cast<int>(state.range(0)), 7);
  const auto pushes = sample_pushes(s, 16, GripperTip{});
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resolve_push(s, pushes[i++ % pushes.size()], GripperTip{}, {}));
  }
}
BENCHMARK(BM_ResolvePush)->Arg(4)->Arg(8)->Arg(12);

void BM_BatchResolve(benchmark::State& state) {
  const WorldState s = scene(8, 7);
  const auto pushes = sample_pushes(s, 16, GripperTip{});
  const std::vector<WorldState> states(pushes.size(), s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_resolve(states, pushes, GripperTip{}, {}, nullptr));
  }
}
BENCHMARK(BM_BatchResolve);

void BM_Graspable(benchmark::State& state) {
  const WorldState s = scene(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(graspable(s, GraspGeometry{}, 0.003));
  }
}
BENCHMARK(BM_Graspable)->Arg(4)->Arg(8)->Arg(12);

void BM_SelectBatch(benchmark::State& state) {
  const WorldState s = scene(8, 3);
  pmbs::ParallelConfig cfg;
  cfg.budget = mcts::Budget::iterations(8);
  cfg.n_envs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pmbs::run_pmbs(s, cfg));
  }
}
BENCHMARK(BM_SelectBatch)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
