#include "run_config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "sketchlidar/errors.hpp"

namespace sketchlidar::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void fetch(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void parse_scene(const json& obj, SceneSpec& scene) {
  reject_unknown_keys(obj,
                      {"type", "tof_bins", "fg_bins", "bg_bins", "mask", "rect",
                       "checker_cell", "detection_prob", "signal_fraction"},
                      "scene");
  fetch(obj, "type", scene.type);
  fetch(obj, "tof_bins", scene.tof_bins);
  fetch(obj, "fg_bins", scene.fg_bins);
  fetch(obj, "bg_bins", scene.bg_bins);
  fetch(obj, "mask", scene.mask);
  fetch(obj, "rect", scene.rect);
  fetch(obj, "checker_cell", scene.checker_cell);
  fetch(obj, "detection_prob", scene.detection_prob);
  fetch(obj, "signal_fraction", scene.signal_fraction);
}

void parse_irf(const json& obj, IrfSpec& irf) {
  reject_unknown_keys(obj, {"shape", "fwhm_bins"}, "irf");
  fetch(obj, "shape", irf.shape);
  fetch(obj, "fwhm_bins", irf.fwhm_bins);
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;

  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!obj.is_object()) throw ConfigError("config: top level must be a JSON object");

  reject_unknown_keys(obj,
                      {"mode", "lut_depth", "fxp", "rows", "cols", "fmax", "seed",
                       "threads", "background", "lut_offset_correction", "delays",
                       "scene", "irf", "out_dir"},
                      "the top level");
  fetch(obj, "mode", cfg.mode);
  fetch(obj, "lut_depth", cfg.lut_depth);
  if (obj.contains("fxp")) {
    const json& fxp = obj.at("fxp");
    reject_unknown_keys(fxp, {"total_bits", "frac_bits"}, "fxp");
    fetch(fxp, "total_bits", cfg.fxp_total_bits);
    fetch(fxp, "frac_bits", cfg.fxp_frac_bits);
  }
  fetch(obj, "rows", cfg.rows);
  fetch(obj, "cols", cfg.cols);
  fetch(obj, "fmax", cfg.fmax);
  fetch(obj, "seed", cfg.seed);
  fetch(obj, "threads", cfg.threads);
  if (obj.contains("background")) {
    const json& bg = obj.at("background");
    if (bg.is_number()) {
      cfg.background = std::to_string(bg.get<double>());
    } else if (bg.is_string()) {
      cfg.background = bg.get<std::string>();
    } else {
      throw ConfigError("config: background must be a number or \"auto\"");
    }
  }
  fetch(obj, "lut_offset_correction", cfg.lut_offset_correction);
  fetch(obj, "delays", cfg.delays);
  if (obj.contains("scene")) parse_scene(obj.at("scene"), cfg.scene);
  if (obj.contains("irf")) parse_irf(obj.at("irf"), cfg.irf);
  fetch(obj, "out_dir", cfg.out_dir);
  return cfg;
}

SplineMode mode_of(const RunConfig& cfg) { return SplineMode::from_name(cfg.mode); }

FxpFormat fxp_format_of(const RunConfig& cfg, SplineMode mode) {
  return FxpFormat(cfg.fxp_total_bits, cfg.fxp_frac_bits, mode.needs_signed());
}

SketchConfig sketch_config_of(const RunConfig& cfg) {
  SketchConfig sketch;
  sketch.rows = cfg.rows;
  sketch.cols = cfg.cols;
  sketch.fmax = cfg.fmax;
  return sketch;
}

Scene build_scene(const RunConfig& cfg) {
  const SceneSpec& spec = cfg.scene;
  if (spec.type == "uniform") {
    return make_uniform_scene(cfg.rows, cfg.cols, spec.tof_bins, spec.detection_prob,
                              spec.signal_fraction);
  }
  if (spec.type == "two_depth") {
    std::vector<uint8_t> mask(static_cast<size_t>(cfg.rows) * cfg.cols, 0);
    if (spec.mask == "rect") {
      std::vector<int> r = spec.rect;
      if (r.empty()) {
        r = {cfg.rows / 4, cfg.cols / 4, 3 * cfg.rows / 4, 3 * cfg.cols / 4};
      }
      if (r.size() != 4 || r[0] < 0 || r[1] < 0 || r[2] > cfg.rows || r[3] > cfg.cols ||
          r[0] >= r[2] || r[1] >= r[3]) {
        throw ConfigError("config: scene.rect must be [r0, c0, r1, c1] inside the array");
      }
      for (int row = r[0]; row < r[2]; ++row) {
        for (int col = r[1]; col < r[3]; ++col) {
          mask[static_cast<size_t>(row) * cfg.cols + col] = 1;
        }
      }
    } else if (spec.mask == "checker") {
      if (spec.checker_cell < 1) throw ConfigError("config: checker_cell must be positive");
      for (int row = 0; row < cfg.rows; ++row) {
        for (int col = 0; col < cfg.cols; ++col) {
          mask[static_cast<size_t>(row) * cfg.cols + col] =
              static_cast<uint8_t>(((row / spec.checker_cell) + (col / spec.checker_cell)) % 2);
        }
      }
    } else {
      throw ConfigError("config: unknown scene mask '" + spec.mask + "'");
    }
    return make_two_depth_scene(cfg.rows, cfg.cols, spec.fg_bins, spec.bg_bins, mask,
                                spec.detection_prob, spec.signal_fraction);
  }
  throw ConfigError("config: unknown scene type '" + spec.type + "'");
}

IrfModel irf_of(const RunConfig& cfg) {
  if (cfg.irf.shape == "gaussian") return IrfModel::gaussian(cfg.irf.fwhm_bins);
  if (cfg.irf.shape == "delta") return IrfModel::delta();
  throw ConfigError("config: unknown irf shape '" + cfg.irf.shape + "'");
}

std::optional<double> background_of(const RunConfig& cfg) {
  if (cfg.background == "auto") return std::nullopt;
  try {
    size_t used = 0;
    const double value = std::stod(cfg.background, &used);
    if (used != cfg.background.size()) throw std::invalid_argument("trailing junk");
    if (value < 0.0 || value > 1.0) {
      throw ConfigError("config: background must lie in [0, 1]");
    }
    return value;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("config: background must be \"auto\" or a number in [0, 1]");
  }
}

double lut_offset_bins(int lut_depth) {
  return (static_cast<double>(kTimeBins) / lut_depth - 1.0) / 2.0;
}

void validate_run_config(const RunConfig& cfg) {
  const SplineMode mode = mode_of(cfg);
  const FxpFormat fmt = fxp_format_of(cfg, mode);
  if (!is_valid_rom_depth(cfg.lut_depth)) {
    throw ConfigError("config: lut_depth must be one of {32, 64, 128, 256, 512}");
  }
  validate_config(sketch_config_of(cfg), fmt);
  validate_irf(irf_of(cfg));
  validate_scene(build_scene(cfg));
  (void)background_of(cfg);
  if (cfg.threads < 0) throw ConfigError("config: threads must be >= 0");
  if (cfg.out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
}

}  // namespace sketchlidar::cli
