#pragma once

// Synthetic single-event SPAD array: per pixel, at most one photon per frame,
// drawn from a signal-plus-uniform-background mixture. Frame generation is a
// pure function of (scene, irf, seed, frame_index), so sequences are
// reproducible bit for bit and frames can be generated in parallel.

#include <cstdint>
#include <vector>

#include "sketchlidar/spe.hpp"

namespace sketchlidar {

struct ScenePixel {
  double tof_bins = 0.0;        // ground truth, in [0, 4096)
  double detection_prob = 0.0;  // chance of one photon per frame
  double signal_fraction = 1.0; // signal vs uniform background mixture
  bool active = true;           // inactive pixels always emit code 0
};

struct Scene {
  int rows = 0;
  int cols = 0;
  std::vector<ScenePixel> pixels;

  ScenePixel& at(int row, int col) { return pixels[static_cast<size_t>(row) * cols + col]; }
  const ScenePixel& at(int row, int col) const {
    return pixels[static_cast<size_t>(row) * cols + col];
  }
};

struct IrfModel {
  enum class Shape { gaussian, delta_pulse };

  Shape shape = Shape::gaussian;
  double fwhm_bins = 50.0;

  static IrfModel gaussian(double fwhm_bins) { return {Shape::gaussian, fwhm_bins}; }
  static IrfModel delta() { return {Shape::delta_pulse, 0.0}; }
};

void validate_scene(const Scene& scene);
void validate_irf(const IrfModel& irf);

Scene make_uniform_scene(int rows, int cols, double tof_bins, double detection_prob,
                         double signal_fraction);

// Masked pixels get the foreground depth, the rest the background depth.
// mask holds one byte per pixel, row-major; nonzero selects foreground.
Scene make_two_depth_scene(int rows, int cols, double fg_depth_bins, double bg_depth_bins,
                           const std::vector<uint8_t>& mask, double detection_prob,
                           double signal_fraction);

// Shifts every ground-truth depth by delay_bins, wrapping modulo 4096.
void apply_stop_delay(Scene& scene, double delay_bins);

// One frame of timestamps, row-major. Draws of exactly 0 are re-coded to 1 so
// code 0 stays reserved for "no photon".
std::vector<SpadTimestamp> generate_frame(const Scene& scene, const IrfModel& irf,
                                          uint64_t seed, uint32_t frame_index);

// n_frames frames concatenated frame-major. threads <= 0 uses all cores.
std::vector<SpadTimestamp> generate_frames(const Scene& scene, const IrfModel& irf,
                                           int n_frames, uint64_t seed, int threads = 1);

}  // namespace sketchlidar
