#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sketchlidar/reference.hpp"
#include "sketchlidar/sensor.hpp"
#include "sketchlidar/solver.hpp"
#include "sketchlidar/spe.hpp"

using namespace sketchlidar;

namespace {

const FxpFormat kU16F7(16, 7, false);

std::vector<SpadTimestamp> random_codes(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> code(0, 4095);
  std::vector<SpadTimestamp> out(n);
  for (SpadTimestamp& ts : out) ts.code = static_cast<uint16_t>(code(rng));
  return out;
}

void BM_BuildRom(benchmark::State& state) {
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_rom(SplineMode::polynomial(1), depth, kU16F7));
  }
}
BENCHMARK(BM_BuildRom)->Arg(64)->Arg(256)->Arg(512);

void BM_SpeStep(benchmark::State& state) {
  SketchConfig cfg;
  cfg.rows = 1;
  cfg.cols = 1;
  cfg.fmax = 1 << 30;  // throughput probe; clamping past the budget is fine here
  SpeArray spe(cfg, build_rom(SplineMode::polynomial(1), 256, kU16F7));
  const auto codes = random_codes(4096, 7);
  size_t i = 0;
  for (auto _ : state) {
    spe.step(0, 0, codes[i++ & 4095]);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SpeStep);

void BM_RunFrame(benchmark::State& state) {
  SketchConfig cfg;  // 192 x 128
  cfg.fmax = 1 << 30;
  SpeArray spe(cfg, build_rom(SplineMode::polynomial(1), 256, kU16F7));
  const auto frame = random_codes(static_cast<size_t>(cfg.rows) * cfg.cols, 9);
  for (auto _ : state) {
    spe.run_frame(frame);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(frame.size()));
}
BENCHMARK(BM_RunFrame);

void BM_GenerateFrame(benchmark::State& state) {
  const Scene scene = make_uniform_scene(192, 128, 1536.0, 0.9, 0.95);
  const IrfModel irf = IrfModel::gaussian(50.0);
  uint32_t f = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_frame(scene, irf, 1, f++));
  }
  state.SetItemsProcessed(state.iterations() * 192 * 128);
}
BENCHMARK(BM_GenerateFrame);

void BM_FlpSketch(benchmark::State& state) {
  const auto photons = random_codes(512, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flp_sketch(photons, SplineMode::polynomial(1)));
  }
}
BENCHMARK(BM_FlpSketch);

void BM_SolveLinear(benchmark::State& state) {
  NormalizedSketch s;
  s.photon_count = 512;
  s.z = {0.12, 0.58, 0.27, 0.03};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_linear(s, 0.05));
  }
}
BENCHMARK(BM_SolveLinear);

void BM_SolveFourier(benchmark::State& state) {
  NormalizedSketch s;
  s.photon_count = 512;
  s.z = {0.31, 0.64, -0.31, -0.64};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_fourier(s));
  }
}
BENCHMARK(BM_SolveFourier);

void BM_GridSolve(benchmark::State& state) {
  const GridSolver grid(SplineMode::polynomial(2));
  NormalizedSketch s;
  s.photon_count = 512;
  s.z = {0.05, 0.52, 0.40, 0.03};
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid.solve(s, 0.0));
  }
}
BENCHMARK(BM_GridSolve);

void BM_HistogramBuild(benchmark::State& state) {
  const auto codes = random_codes(100000, 13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(histogram_build(codes));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(codes.size()));
}
BENCHMARK(BM_HistogramBuild);

void BM_LocalCmm(benchmark::State& state) {
  Histogram h;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(1800.0, 21.0);
  for (int i = 0; i < 100000; ++i) {
    const int code = static_cast<int>(noise(rng));
    if (code > 0 && code < kTimeBins) ++h.counts[static_cast<size_t>(code)];
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(local_cmm(h, 25));
  }
}
BENCHMARK(BM_LocalCmm);

}  // namespace

BENCHMARK_MAIN();
