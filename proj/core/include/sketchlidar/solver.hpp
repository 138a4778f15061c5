#pragma once

// Offline reconstruction: normalization by the photon count (the division the
// hardware defers to software) and ToF estimation from the four sketch values.
// All solvers are pure per-pixel functions.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sketchlidar/spe.hpp"

namespace sketchlidar {

inline constexpr double kSecondsPerBin = 40e-12;  // 12-bit TDC at 40 ps
inline constexpr double kMetersPerBin = kSecondsPerBin * 299792458.0 / 2.0;

struct NormalizedSketch {
  std::array<double, kSketchSize> z{};
  uint32_t photon_count = 0;
  int row = 0;
  int col = 0;

  bool valid() const { return photon_count > 0; }
};

// z_i = accum_i * 2^-F / n. A zero photon count yields an invalid sketch; it
// is a data condition, not a fault.
NormalizedSketch normalize(const std::array<int64_t, kSketchSize>& accum_raws,
                           const FxpFormat& fmt, uint32_t photon_count);
NormalizedSketch normalize(const UnpackedRecord& rec, const FxpFormat& fmt);

// Default per-pixel background level: M * min_i z_i.
double estimate_background(const NormalizedSketch& s);

// Closed form for the hat basis: subtract background/M (clamping at zero),
// pick the circular adjacent pair with the largest sum (ties to the smallest
// index) and invert the pair ratio. Exact for noiseless delta returns.
std::optional<double> solve_linear(const NormalizedSketch& s, double background);

// Two-point phase estimate: c = (z0 - z2)/2, s = (z1 - z3)/2,
// tof = T/(2*pi) * atan2(s, c). The differencing cancels any uniform
// background term exactly; c = s = 0 means no recoverable phase.
std::optional<double> solve_fourier(const NormalizedSketch& s);

// Reference solver: nearest noiseless forward sketch over a dense grid of
// delta positions, ties to the smallest position. Handles every mode; the
// only reconstruction path for p=2.
class GridSolver {
 public:
  explicit GridSolver(SplineMode mode, double step_bins = 0.25);

  std::optional<double> solve(const NormalizedSketch& s, double background) const;
  double step_bins() const { return step_; }

 private:
  SplineMode mode_;
  double step_;
  std::vector<std::array<double, kSketchSize>> table_;
  std::vector<double> self_dot_;
};

std::optional<double> solve_grid(const NormalizedSketch& s, SplineMode mode,
                                 double background);

struct DepthMap {
  int rows = 0;
  int cols = 0;
  std::vector<double> tof_bins;  // NaN marks an invalid pixel

  static DepthMap invalid(int rows, int cols);

  double& at(int row, int col) { return tof_bins[static_cast<size_t>(row) * cols + col]; }
  double at(int row, int col) const { return tof_bins[static_cast<size_t>(row) * cols + col]; }
  bool is_valid(int row, int col) const;
  double meters_at(int row, int col) const { return at(row, col) * kMetersPerBin; }
  size_t valid_count() const;
};

struct ReconstructOptions {
  SplineMode mode = SplineMode::polynomial(1);
  FxpFormat format{16, 7, false};
  std::optional<double> background;  // nullopt: per-pixel M * min_i z_i
  double offset_bins = 0.0;          // constant added to estimates, wrapped mod T
  int threads = 1;
};

// Pixel-wise normalize + solve. records must hold rows*cols entries in
// row-major order; invalid pixels propagate as NaN.
DepthMap build_depth_map(std::span<const PackedSketchRecord> records, int rows, int cols,
                         const ReconstructOptions& opts);

// Same reconstruction on already-normalized sketches (e.g. the full-precision
// reference path).
DepthMap depth_map_from_sketches(std::span<const NormalizedSketch> sketches, int rows,
                                 int cols, SplineMode mode,
                                 std::optional<double> background, double offset_bins,
                                 int threads);

double wrap_bins(double t);  // into [0, kTimeBins)

}  // namespace sketchlidar
