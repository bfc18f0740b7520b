#include <benchmark/benchmark.h>

#include "ffdpat/kspace.hpp"
#include "ffdpat/models.hpp"
#include "ffdpat/radon.hpp"

using namespace ffdpat;

static void BM_Step(benchmark::State& state) {
  const Grid3 g(static_cast<int>(state.range(0)), 2.0);
  WaveConfig cfg(make_speed(model_a(), g), WaveOptions{});
  WavePropagator prop(cfg);
  LeapfrogState s = prop.init_state(make_phantom(default_phantom(), g));
  for (auto _ : state) {
    if (s.step >= cfg.steps()) s.step = 0;
    prop.advance(s);
    benchmark::DoNotOptimize(s.w_curr.data());
  }
}
BENCHMARK(BM_Step)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_RadonSlice(benchmark::State& state) {
  const Lattice2 lat{static_cast<int>(state.range(0)), 1.0};
  const Image2 disc = disc_image(lat, 0.5);
  const auto angles = uniform_angles(180);
  const auto offsets = uniform_offsets(lat.n, lat.half_width);
  for (auto _ : state) benchmark::DoNotOptimize(radon_slice(disc, angles, offsets));
}
BENCHMARK(BM_RadonSlice)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_FbpSlice(benchmark::State& state) {
  const Lattice2 lat{static_cast<int>(state.range(0)), 1.0};
  const auto angles = uniform_angles(180);
  const auto offsets = uniform_offsets(lat.n, lat.half_width);
  const auto sino = radon_slice(disc_image(lat, 0.5), angles, offsets);
  for (auto _ : state) benchmark::DoNotOptimize(fbp_slice(sino, angles, offsets, lat));
}
BENCHMARK(BM_FbpSlice)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
