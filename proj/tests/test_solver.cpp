#include <doctest.h>

#include <cmath>
#include <random>

#include "sketchlidar/reference.hpp"
#include "sketchlidar/sensor.hpp"
#include "sketchlidar/solver.hpp"

using namespace sketchlidar;

namespace {

const FxpFormat kU16F7(16, 7, false);

NormalizedSketch sketch_of(std::array<double, kSketchSize> z, uint32_t n = 100) {
  NormalizedSketch s;
  s.z = z;
  s.photon_count = n;
  return s;
}

// Noiseless continuous sketch of a delta at t, the forward model the solvers
// invert.
NormalizedSketch delta_sketch(SplineMode mode, double t) {
  NormalizedSketch s;
  s.photon_count = 1;
  for (int i = 0; i < kSketchSize; ++i) {
    double b = std::fmod(t - i * kCellBins, static_cast<double>(kTimeBins));
    if (b < 0.0) b += kTimeBins;
    s.z[static_cast<size_t>(i)] = spline_basis_eval(mode, b / kCellBins);
  }
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("normalize divides by the photon count") {
  const NormalizedSketch s = normalize({128, 128, 0, 0}, kU16F7, 2);
  CHECK(s.valid());
  CHECK(s.z[0] == 0.5);
  CHECK(s.z[1] == 0.5);
  CHECK(s.z[2] == 0.0);
  CHECK(s.z[3] == 0.0);

  const NormalizedSketch invalid = normalize({128, 128, 0, 0}, kU16F7, 0);
  CHECK_FALSE(invalid.valid());
}

TEST_CASE("normalized polynomial sketches sum close to one") {
  const SketchRom rom = build_rom(SplineMode::polynomial(1), 256, kU16F7);
  const double r_dc = static_cast<double>(kTimeBins) / rom.depth();
  const double bound = kSketchSize * (r_dc / kCellBins + kU16F7.step());
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> code(1, 4095);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<int64_t, kSketchSize> acc{};
    const int n = 1 + trial;
    for (int k = 0; k < n; ++k) {
      const int x = code(rng);
      for (int i = 0; i < kSketchSize; ++i) {
        acc[static_cast<size_t>(i)] += rom.raw(lut_address(modulo_unit(x, i), rom.depth()));
      }
    }
    const NormalizedSketch s = normalize(acc, kU16F7, static_cast<uint32_t>(n));
    const double sum = s.z[0] + s.z[1] + s.z[2] + s.z[3];
    REQUIRE(std::abs(sum - 1.0) <= bound);
  }
}

TEST_CASE("linear solver examples") {
  CHECK(*solve_linear(sketch_of({0.5, 0.5, 0.0, 0.0}), 0.0) == doctest::Approx(1536.0));
  CHECK(*solve_linear(sketch_of({1.0, 0.0, 0.0, 0.0}), 0.0) == doctest::Approx(1024.0));
  CHECK_FALSE(solve_linear(sketch_of({0.25, 0.25, 0.25, 0.25}), 1.0).has_value());
  CHECK_FALSE(solve_linear(sketch_of({0.1, 0.1, 0.1, 0.1}, 0), 0.0).has_value());
}

TEST_CASE("linear solver is exact for noiseless deltas away from the sentinel") {
  const SplineMode p1 = SplineMode::polynomial(1);
  for (int t = 1; t < kTimeBins; t += 3) {
    const auto est = solve_linear(delta_sketch(p1, t), 0.0);
    REQUIRE(est.has_value());
    REQUIRE(std::abs(circular_error_bins(*est, t)) <= 0.5);
  }
}

TEST_CASE("background subtraction recovers the shifted estimate") {
  // signal at 1536 mixed with a uniform floor of 0.2
  NormalizedSketch s = sketch_of({0.8 * 0.5 + 0.05, 0.8 * 0.5 + 0.05, 0.05, 0.05});
  CHECK(*solve_linear(s, 0.2) == doctest::Approx(1536.0));
  // the default per-pixel estimate finds the same floor
  CHECK(estimate_background(s) == doctest::Approx(0.2));
}

TEST_CASE("fourier solver examples") {
  CHECK(*solve_fourier(sketch_of({0.0, 1.0, 0.0, -1.0})) == doctest::Approx(1024.0));
  CHECK(*solve_fourier(sketch_of({1.0, 0.0, -1.0, 0.0})) == doctest::Approx(0.0));
  CHECK_FALSE(solve_fourier(sketch_of({0.3, 0.3, 0.3, 0.3})).has_value());
}

TEST_CASE("fourier solver is exact for noiseless deltas") {
  const SplineMode mode = SplineMode::fourier();
  for (int t = 1; t < kTimeBins; t += 3) {
    const auto est = solve_fourier(delta_sketch(mode, t));
    REQUIRE(est.has_value());
    REQUIRE(std::abs(circular_error_bins(*est, t)) <= 0.5);
  }
}

TEST_CASE("fourier background invariance is exact on representable inputs") {
  // values on the 2^-10 grid add exactly in doubles, so invariance is bitwise
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> grid(-1024, 1024);
  std::uniform_int_distribution<int> bg_grid(0, 1023);
  for (int it = 0; it < 5000; ++it) {
    std::array<double, kSketchSize> z{};
    for (double& v : z) v = grid(rng) / 1024.0;
    const double b = bg_grid(rng) / 1024.0;
    const auto base = solve_fourier(sketch_of(z));
    std::array<double, kSketchSize> shifted = z;
    for (double& v : shifted) v += b;
    const auto moved = solve_fourier(sketch_of(shifted));
    REQUIRE(base.has_value() == moved.has_value());
    if (base) REQUIRE(*base == *moved);
  }
}

TEST_CASE("grid solver agrees with the closed forms on noiseless deltas") {
  const GridSolver grid_p1(SplineMode::polynomial(1));
  const GridSolver grid_f(SplineMode::fourier());
  for (int t = 1; t < kTimeBins; t += 37) {
    const auto s1 = delta_sketch(SplineMode::polynomial(1), t);
    const auto g1 = grid_p1.solve(s1, 0.0);
    REQUIRE(std::abs(circular_error_bins(*g1, *solve_linear(s1, 0.0))) <= 0.25);

    const auto sf = delta_sketch(SplineMode::fourier(), t);
    const auto gf = grid_f.solve(sf, 0.0);
    REQUIRE(std::abs(circular_error_bins(*gf, *solve_fourier(sf))) <= 0.25);
  }
}

TEST_CASE("grid solver handles t = 0 and p2") {
  CHECK(*solve_grid(delta_sketch(SplineMode::polynomial(1), 0.0), SplineMode::polynomial(1), 0.0) == 0.0);
  const GridSolver grid_p2(SplineMode::polynomial(2));
  for (int t = 1; t < kTimeBins; t += 113) {
    const auto est = grid_p2.solve(delta_sketch(SplineMode::polynomial(2), t), 0.0);
    REQUIRE(est.has_value());
    REQUIRE(std::abs(circular_error_bins(*est, t)) <= 0.25);
  }
}

TEST_CASE("circular consistency: shifting the delta by one cell shifts the estimate") {
  const SplineMode p1 = SplineMode::polynomial(1);
  for (int t = 1; t < kTimeBins; t += 101) {
    const double base = *solve_linear(delta_sketch(p1, t), 0.0);
    const double moved = *solve_linear(delta_sketch(p1, (t + kCellBins) % kTimeBins), 0.0);
    REQUIRE(std::abs(circular_error_bins(moved, base + kCellBins)) <= 1e-9);
  }
}

TEST_CASE("depth map container basics") {
  DepthMap map = DepthMap::invalid(2, 3);
  CHECK(map.valid_count() == 0);
  map.at(1, 2) = 1536.0;
  CHECK(map.is_valid(1, 2));
  CHECK_FALSE(map.is_valid(0, 0));
  CHECK(map.valid_count() == 1);
  CHECK(map.meters_at(1, 2) == doctest::Approx(1536.0 * kMetersPerBin));
  CHECK(kMetersPerBin == doctest::Approx(0.0059958492).epsilon(1e-6));
}

TEST_CASE("build_depth_map solves pixel-wise from packed records") {
  // two pixels: a photon pair at 1536 and a dark pixel
  std::vector<PackedSketchRecord> records(2);
  records[0] = pack_record({128, 128, 0, 0}, 2);
  records[1] = pack_record({0, 0, 0, 0}, 0);

  ReconstructOptions opts;
  opts.background = 0.0;
  const DepthMap map = build_depth_map(records, 1, 2, opts);
  CHECK(map.is_valid(0, 0));
  CHECK(map.at(0, 0) == doctest::Approx(1536.0));
  CHECK_FALSE(map.is_valid(0, 1));

  CHECK_THROWS_AS(build_depth_map(records, 2, 2, opts), std::invalid_argument);
}

TEST_CASE("build_depth_map applies the constant offset modulo T") {
  std::vector<PackedSketchRecord> records(1);
  records[0] = pack_record({128, 128, 0, 0}, 2);
  ReconstructOptions opts;
  opts.background = 0.0;
  opts.offset_bins = 7.5;
  CHECK(build_depth_map(records, 1, 1, opts).at(0, 0) == doctest::Approx(1543.5));
  opts.offset_bins = 4000.0;
  CHECK(build_depth_map(records, 1, 1, opts).at(0, 0) == doctest::Approx(1440.0));
}

TEST_CASE("noiseless end-to-end reconstruction through the full-precision path") {
  // delta IRF, every pixel lit: sensor -> continuous sketches -> solver
  const int rows = 8, cols = 8, frames = 32;
  const Scene scene = make_uniform_scene(rows, cols, 2345.0, 1.0, 1.0);
  const auto all = generate_frames(scene, IrfModel::delta(), frames, 3, 1);
  const auto sketches = flp_sketch_map(all, rows, cols, frames, SplineMode::polynomial(1));
  const DepthMap map =
      depth_map_from_sketches(sketches, rows, cols, SplineMode::polynomial(1), 0.0, 0.0, 1);
  REQUIRE(map.valid_count() == static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      REQUIRE(std::abs(circular_error_bins(map.at(r, c), 2345.0)) <= 0.5);
    }
  }
}

TEST_CASE("zero-photon acquisition yields an all-invalid map") {
  std::vector<PackedSketchRecord> records(6);
  ReconstructOptions opts;
  const DepthMap map = build_depth_map(records, 2, 3, opts);
  CHECK(map.valid_count() == 0);
}

TEST_CASE("two-depth scene recovers both modes") {
  const int rows = 8, cols = 8, frames = 64;
  std::vector<uint8_t> mask(static_cast<size_t>(rows) * cols, 0);
  for (int r = 0; r < rows / 2; ++r)
    for (int c = 0; c < cols; ++c) mask[static_cast<size_t>(r) * cols + c] = 1;
  const Scene scene = make_two_depth_scene(rows, cols, 1104.0, 2608.0, mask, 1.0, 1.0);
  const auto all = generate_frames(scene, IrfModel::delta(), frames, 17, 1);

  SketchConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.fmax = frames;
  SpeArray spe(cfg, build_rom(SplineMode::polynomial(1), 256, kU16F7));
  for (int f = 0; f < frames; ++f) {
    spe.run_frame(std::span<const SpadTimestamp>(all).subspan(
        static_cast<size_t>(f) * rows * cols, static_cast<size_t>(rows) * cols));
  }
  const auto records = spe.readout();

  ReconstructOptions opts;
  opts.background = 0.0;
  const DepthMap map = build_depth_map(records, rows, cols, opts);
  REQUIRE(map.valid_count() == static_cast<size_t>(rows) * cols);
  // depths are grid-aligned (multiples of 16), so the LUT path is exact here
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double expected = r < rows / 2 ? 1104.0 : 2608.0;
      REQUIRE(std::abs(circular_error_bins(map.at(r, c), expected)) <= 0.5);
    }
  }
}

TEST_SUITE_END();
