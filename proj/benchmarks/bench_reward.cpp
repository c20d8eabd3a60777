#include <benchmark/benchmark.h>

#include "motionalign/flow.hpp"
#include "motionalign/reward.hpp"
#include "motionalign/rng.hpp"

namespace {

motionalign::FlowField random_flow(int side, std::uint64_t seed) {
  motionalign::CounterRng rng(seed, 1);
  motionalign::FlowField f(side, side);
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    f.u[i] = static_cast<float>(4.0 * rng.normal());
    f.v[i] = static_cast<float>(4.0 * rng.normal());
  }
  return f;
}

void BM_RewardFromFlows(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto pred = motionalign::normalize_flow(random_flow(side, 1));
  const auto gt = motionalign::normalize_flow(random_flow(side, 2));
  const motionalign::RewardConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(motionalign::reward_from_flows(pred, gt, cfg));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_RewardFromFlows)->Arg(64)->Arg(256)->Arg(512);

void BM_MasFromFlows(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto pred = motionalign::normalize_flow(random_flow(side, 3));
  const auto gt = motionalign::normalize_flow(random_flow(side, 4));
  const motionalign::RewardConfig rcfg;
  const motionalign::MasConfig mcfg;
  for (auto _ : state) benchmark::DoNotOptimize(motionalign::mas_from_flows(pred, gt, mcfg, rcfg));
}
BENCHMARK(BM_MasFromFlows)->Arg(256);

}  // namespace
