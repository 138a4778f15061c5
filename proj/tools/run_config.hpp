#pragma once

// Run configuration for the batch driver: defaults, JSON config file keys and
// the builders that turn a config into library objects. Command-line flags
// override file values; the merge happens in main.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sketchlidar/sensor.hpp"
#include "sketchlidar/splines.hpp"

namespace sketchlidar::cli {

struct SceneSpec {
  std::string type = "uniform";  // uniform | two_depth
  double tof_bins = 1500.0;      // uniform scene depth
  double fg_bins = 1100.0;       // two_depth foreground
  double bg_bins = 2600.0;       // two_depth background
  std::string mask = "rect";     // rect | checker
  std::vector<int> rect;         // r0, c0, r1, c1 half-open; empty = centered box
  int checker_cell = 8;
  double detection_prob = 0.9;
  double signal_fraction = 0.95;
};

struct IrfSpec {
  std::string shape = "gaussian";  // gaussian | delta
  double fwhm_bins = 50.0;
};

struct RunConfig {
  std::string mode = "p1";  // p1 | p2 | fourier
  int lut_depth = 256;
  int fxp_total_bits = 16;
  int fxp_frac_bits = 7;
  int rows = 192;
  int cols = 128;
  int fmax = 512;
  uint64_t seed = 1;
  int threads = 0;                   // 0 = all cores
  std::string background = "auto";   // "auto" or a number
  bool lut_offset_correction = true; // add (R_dc - 1)/2 bins to LUT-path depths
  std::vector<double> delays = {0,    250,  500,  750,  1000, 1250, 1500, 1750,
                                2000, 2250, 2500, 2750, 3000, 3250, 3500};
  SceneSpec scene;
  IrfSpec irf;
  std::string out_dir = "out";
};

// Defaults when path is empty; otherwise defaults merged with the JSON file.
// Unknown keys, malformed JSON and bad values raise ConfigError; an unreadable
// file raises IoError.
RunConfig load_run_config(const std::filesystem::path& path);

// Semantic validation of everything a command may touch.
void validate_run_config(const RunConfig& cfg);

SplineMode mode_of(const RunConfig& cfg);
FxpFormat fxp_format_of(const RunConfig& cfg, SplineMode mode);
SketchConfig sketch_config_of(const RunConfig& cfg);
Scene build_scene(const RunConfig& cfg);
IrfModel irf_of(const RunConfig& cfg);
std::optional<double> background_of(const RunConfig& cfg);

// (R_dc - 1)/2 bins: centers the floor-based LUT address truncation.
double lut_offset_bins(int lut_depth);

}  // namespace sketchlidar::cli
