#pragma once

// Reference paths and metrics: full-precision floating-point sketches (no LUT,
// no fixed point), the conventional TCSPC histogram pipeline, the windowed
// center-of-mass estimator, circular error reports and compression accounting.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sketchlidar/solver.hpp"

namespace sketchlidar {

struct Histogram {
  std::array<uint32_t, kTimeBins> counts{};

  void add(SpadTimestamp ts) {
    if (ts.has_photon()) ++counts[ts.code];
  }
  uint64_t total() const;
};

Histogram histogram_build(std::span<const SpadTimestamp> stream);

// Evaluates the sketch sum with the continuous basis at full precision.
// Codes of 0 are skipped, like everywhere else in the pipeline.
NormalizedSketch flp_sketch(std::span<const SpadTimestamp> photons, SplineMode mode);

// Same sum driven from histogram counts; identical to flp_sketch up to
// floating-point reassociation.
NormalizedSketch sketch_from_histogram(const Histogram& h, SplineMode mode);

// Windowed centroid around the argmax bin (ties to the smallest bin), with
// circular wrap of the window coordinates. Empty histogram yields nothing.
std::optional<double> local_cmm(const Histogram& h, int window_bins);

inline constexpr int kDefaultCmmWindowBins = 25;

struct CompressionRatios {
  double frame_ratio = 0.0;  // input frames per output record
  double byte_ratio = 0.0;   // timestamp bytes per packed-record bytes
};

// frame_ratio = fmax; byte_ratio from the on-disk formats: fmax frames of
// 2-byte timestamps against one 12-byte record per pixel.
CompressionRatios compression_ratio(const SketchConfig& cfg);

struct ErrorReport {
  DepthMap error_map;  // signed circular error est - ref, NaN where either is invalid
  size_t valid_pixels = 0;
  double mean_abs_error = 0.0;  // bins
  double rmse = 0.0;            // bins
  double mean_log_error = 0.0;  // mean log10(|e| + 1)
  double frame_ratio = 0.0;     // filled by the caller from compression_ratio
  double byte_ratio = 0.0;

  bool valid() const { return valid_pixels > 0; }
};

// Circular error wrapped into (-T/2, T/2].
double circular_error_bins(double est, double ref);

// Pairwise-valid comparison; a report with zero valid pixels is itself
// invalid. Dimension mismatch is a usage error.
ErrorReport evaluate(const DepthMap& est, const DepthMap& ref);

// Whole-array reference pipelines over a frame-major timestamp block.
std::vector<NormalizedSketch> flp_sketch_map(std::span<const SpadTimestamp> frames,
                                             int rows, int cols, int n_frames,
                                             SplineMode mode, int threads = 1);

DepthMap cmm_depth_map(std::span<const SpadTimestamp> frames, int rows, int cols,
                       int n_frames, int window_bins = kDefaultCmmWindowBins,
                       int threads = 1);

// Per-pixel max over sketch entries of |a.z - b.z|; NaN where either side is
// invalid. Used for the online-vs-offline difference maps.
DepthMap sketch_difference_map(std::span<const NormalizedSketch> a,
                               std::span<const NormalizedSketch> b, int rows, int cols);

}  // namespace sketchlidar
