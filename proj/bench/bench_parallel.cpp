// Serial reference vs OpenMP kernels. Arg 0 runs the serial path, 1 the
// parallel one.
#include <benchmark/benchmark.h>

#include "fdmr/sim.hpp"
#include "instances.hpp"

using namespace fdmr;

namespace {

ExecPolicy policy(const benchmark::State& state) {
  return state.range(0) ? ExecPolicy::Parallel : ExecPolicy::Serial;
}

void BM_ChannelGains(benchmark::State& state) {
  const auto topo = generate_outdoor_topology(7, 10);
  const auto params = ChannelModelParams::outdoor();
  for (auto _ : state) benchmark::DoNotOptimize(compute_channel_gains(topo, params, 7, policy(state)));
}

void BM_Coordination(benchmark::State& state) {
  const auto topo = generate_indoor_topology(11, 8);
  auto g = compute_channel_gains(topo, ChannelModelParams::indoor(), 11);
  compute_strong_interferers(g, topo);
  const auto t = testing::random_tracker(11, topo.num_ues());
  const auto lb = testing::default_budget(95);
  ScheduleDecision sched(topo.num_cells());
  for (int b = 0; b < topo.num_cells(); ++b) sched[b] = intra_cell_select(b, topo, g, t, lb).sched;
  CoordinationConfig cfg;
  cfg.policy = policy(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_coordination(sched, g, t, lb, cfg));
}

void BM_Campaign(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.drops = 4;
  cfg.slots = 50;
  cfg.cancellation_db = 95;
  cfg.policy = policy(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_campaign(cfg));
}

}  // namespace

BENCHMARK(BM_ChannelGains)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Coordination)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Campaign)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
