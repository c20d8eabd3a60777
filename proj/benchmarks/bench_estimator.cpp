#include <benchmark/benchmark.h>

#include "motionalign/estimator.hpp"
#include "support/texture.hpp"

namespace {

void BM_LucasKanade(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const testsupport::Texture tex(42);
  const auto a = tex.render(side, side);
  const auto b = tex.render(side, side, 3.0, -2.0);
  const motionalign::EstimatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(motionalign::lucas_kanade_flow(a, b, cfg));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_LucasKanade)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Pyramid(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto img = testsupport::Texture(7).render(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(motionalign::build_pyramid(img, 4));
}
BENCHMARK(BM_Pyramid)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

}  // namespace
