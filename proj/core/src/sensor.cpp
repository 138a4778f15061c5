#include "sketchlidar/sensor.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "sketchlidar/parallel.hpp"

namespace sketchlidar {

namespace {

constexpr double kFwhmToSigma = 2.3548200450309493;  // 2*sqrt(2*ln 2)

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Sampling stays on raw engine output (mt19937_64 is fully specified by the
// standard) so sequences do not depend on the C++ library's distributions.
class FrameRng {
 public:
  FrameRng(uint64_t seed, uint32_t frame_index)
      : engine_(splitmix64(seed ^ (0xA5A5A5A500000000ull + frame_index))) {}

  double uniform01() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

  double gaussian() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

uint16_t wrap_code(double t) {
  long long code = std::llround(t) % kTimeBins;
  if (code < 0) code += kTimeBins;
  if (code == 0) code = 1;
  return static_cast<uint16_t>(code);
}

}  // namespace

void validate_scene(const Scene& scene) {
  if (scene.rows <= 0 || scene.cols <= 0 ||
      scene.pixels.size() != static_cast<size_t>(scene.rows) * scene.cols) {
    throw ConfigError("scene: dimensions do not match the pixel array");
  }
  for (const ScenePixel& px : scene.pixels) {
    if (!(px.detection_prob >= 0.0 && px.detection_prob <= 1.0)) {
      throw ConfigError("scene: detection_prob outside [0, 1]");
    }
    if (!(px.signal_fraction >= 0.0 && px.signal_fraction <= 1.0)) {
      throw ConfigError("scene: signal_fraction outside [0, 1]");
    }
    if (!(px.tof_bins >= 0.0 && px.tof_bins < kTimeBins)) {
      throw ConfigError("scene: tof_bins outside [0, 4096)");
    }
  }
}

void validate_irf(const IrfModel& irf) {
  if (irf.fwhm_bins < 0.0) throw ConfigError("irf: fwhm_bins must be non-negative");
  if (irf.shape == IrfModel::Shape::delta_pulse && irf.fwhm_bins != 0.0) {
    throw ConfigError("irf: delta shape implies fwhm_bins == 0");
  }
}

Scene make_uniform_scene(int rows, int cols, double tof_bins, double detection_prob,
                         double signal_fraction) {
  Scene scene;
  scene.rows = rows;
  scene.cols = cols;
  scene.pixels.assign(static_cast<size_t>(rows) * cols,
                      {tof_bins, detection_prob, signal_fraction, true});
  validate_scene(scene);
  return scene;
}

Scene make_two_depth_scene(int rows, int cols, double fg_depth_bins, double bg_depth_bins,
                           const std::vector<uint8_t>& mask, double detection_prob,
                           double signal_fraction) {
  if (mask.size() != static_cast<size_t>(rows) * cols) {
    throw std::invalid_argument("scene: mask size does not match dimensions");
  }
  for (double depth : {fg_depth_bins, bg_depth_bins}) {
    if (!(depth >= 0.0 && depth < kTimeBins)) {
      throw ConfigError("scene: depth outside [0, 4096)");
    }
  }
  Scene scene;
  scene.rows = rows;
  scene.cols = cols;
  scene.pixels.resize(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    scene.pixels[i] = {mask[i] ? fg_depth_bins : bg_depth_bins, detection_prob,
                       signal_fraction, true};
  }
  validate_scene(scene);
  return scene;
}

void apply_stop_delay(Scene& scene, double delay_bins) {
  for (ScenePixel& px : scene.pixels) {
    double t = std::fmod(px.tof_bins + delay_bins, static_cast<double>(kTimeBins));
    if (t < 0.0) t += kTimeBins;
    px.tof_bins = t;
  }
}

std::vector<SpadTimestamp> generate_frame(const Scene& scene, const IrfModel& irf,
                                          uint64_t seed, uint32_t frame_index) {
  validate_scene(scene);
  validate_irf(irf);
  const double sigma = irf.shape == IrfModel::Shape::gaussian
                           ? irf.fwhm_bins / kFwhmToSigma
                           : 0.0;
  FrameRng rng(seed, frame_index);
  std::vector<SpadTimestamp> frame(scene.pixels.size());
  for (size_t i = 0; i < scene.pixels.size(); ++i) {
    const ScenePixel& px = scene.pixels[i];
    if (!px.active) continue;
    if (rng.uniform01() >= px.detection_prob) continue;
    double t;
    if (rng.uniform01() < px.signal_fraction) {
      t = px.tof_bins + sigma * rng.gaussian();
    } else {
      t = rng.uniform01() * kTimeBins;
    }
    frame[i].code = wrap_code(t);
  }
  return frame;
}

std::vector<SpadTimestamp> generate_frames(const Scene& scene, const IrfModel& irf,
                                           int n_frames, uint64_t seed, int threads) {
  validate_scene(scene);
  validate_irf(irf);
  if (n_frames < 0) throw std::invalid_argument("generate_frames: negative frame count");
  const size_t pixels = scene.pixels.size();
  std::vector<SpadTimestamp> all(static_cast<size_t>(n_frames) * pixels);
  parallel_for(0, n_frames, threads, [&](int64_t lo, int64_t hi) {
    for (int64_t f = lo; f < hi; ++f) {
      const auto frame = generate_frame(scene, irf, seed, static_cast<uint32_t>(f));
      std::copy(frame.begin(), frame.end(), all.begin() + f * static_cast<int64_t>(pixels));
    }
  });
  return all;
}

}  // namespace sketchlidar
