// Batch driver wiring the pipeline end to end: LUT generation, synthetic
// acquisition through the emulated SPEs, offline reconstruction and parameter
// sweeps. Exit codes: 0 ok, 2 configuration error, 3 I/O or file-format error.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "sketchlidar/io.hpp"
#include "sketchlidar/parallel.hpp"
#include "sketchlidar/reference.hpp"
#include "sketchlidar/solver.hpp"
#include "sketchlidar/spe.hpp"

namespace fs = std::filesystem;
using namespace sketchlidar;
using namespace sketchlidar::cli;

namespace {

struct AcquisitionData {
  std::vector<SpadTimestamp> frames;  // frame-major
  std::vector<PackedSketchRecord> records;
  uint64_t saturation_events = 0;
  uint64_t photons = 0;
};

DepthMap truth_map(const Scene& scene) {
  DepthMap map = DepthMap::invalid(scene.rows, scene.cols);
  for (size_t p = 0; p < scene.pixels.size(); ++p) {
    if (scene.pixels[p].active) map.tof_bins[p] = scene.pixels[p].tof_bins;
  }
  return map;
}

// Streams fmax frames through the SPE array and keeps the raw timestamps.
AcquisitionData acquire(const RunConfig& cfg, const Scene& scene) {
  const SplineMode mode = mode_of(cfg);
  const FxpFormat fmt = fxp_format_of(cfg, mode);
  const SketchConfig sketch_cfg = sketch_config_of(cfg);
  validate_config(sketch_cfg, fmt);

  AcquisitionData data;
  data.frames = generate_frames(scene, irf_of(cfg), cfg.fmax, cfg.seed, cfg.threads);

  SpeArray spe(sketch_cfg, build_rom(mode, cfg.lut_depth, fmt));
  const size_t pixels = static_cast<size_t>(cfg.rows) * cfg.cols;
  for (int f = 0; f < cfg.fmax; ++f) {
    spe.run_frame(std::span<const SpadTimestamp>(data.frames).subspan(
        static_cast<size_t>(f) * pixels, pixels));
  }
  data.saturation_events = spe.saturation_events();
  data.records = spe.readout();
  for (const SpadTimestamp& ts : data.frames) data.photons += ts.has_photon();
  return data;
}

std::vector<NormalizedSketch> normalized_sketches(const SketchFileData& data) {
  std::vector<NormalizedSketch> sketches(data.records.size());
  for (size_t p = 0; p < data.records.size(); ++p) {
    sketches[p] = normalize(unpack_record(data.records[p], data.header.format),
                            data.header.format);
    sketches[p].row = static_cast<int>(p) / data.header.cols;
    sketches[p].col = static_cast<int>(p) % data.header.cols;
  }
  return sketches;
}

void print_report_line(const char* label, const ErrorReport& report) {
  std::printf("%s: valid_pixels=%zu mean_abs_error=%.6f rmse=%.6f mean_log_error=%.6f\n",
              label, report.valid_pixels, report.mean_abs_error, report.rmse,
              report.mean_log_error);
}

std::string report_csv_row(const ErrorReport& report) {
  char row[256];
  std::snprintf(row, sizeof row, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g", report.valid_pixels,
                report.mean_abs_error, report.rmse, report.mean_log_error,
                report.frame_ratio, report.byte_ratio);
  return row;
}

int cmd_genlut(const RunConfig& cfg, const std::string& mode_arg) {
  if (!is_valid_rom_depth(cfg.lut_depth)) {
    throw ConfigError("genlut: lut_depth must be one of {32, 64, 128, 256, 512}");
  }
  std::vector<SplineMode> modes;
  if (mode_arg == "all") {
    modes = {SplineMode::polynomial(1), SplineMode::polynomial(2), SplineMode::fourier()};
  } else {
    modes = {SplineMode::from_name(mode_arg)};
  }
  fs::create_directories(cfg.out_dir);
  for (const SplineMode mode : modes) {
    const FxpFormat fmt = fxp_format_of(cfg, mode);
    const SketchRom rom = build_rom(mode, cfg.lut_depth, fmt);
    const fs::path path =
        fs::path(cfg.out_dir) / ("rom_" + mode.name() + "_d" + std::to_string(cfg.lut_depth) + ".bin");
    write_rom_file(path, rom);
    std::printf("wrote %s entries=%d fxp=<%d,%d> checksum=0x%016" PRIx64 "\n",
                path.string().c_str(), rom.depth(), fmt.total_bits(), fmt.frac_bits(),
                fnv1a64_file(path));
  }
  return 0;
}

int cmd_acquire(const RunConfig& cfg, double delay) {
  validate_run_config(cfg);
  Scene scene = build_scene(cfg);
  if (delay != 0.0) apply_stop_delay(scene, delay);

  const AcquisitionData data = acquire(cfg, scene);

  fs::create_directories(cfg.out_dir);
  const fs::path ts_path = fs::path(cfg.out_dir) / "timestamps.bin";
  const fs::path sketch_path = fs::path(cfg.out_dir) / "sketch.bin";
  const fs::path truth_path = fs::path(cfg.out_dir) / "truth.bin";

  write_timestamp_file(ts_path, cfg.rows, cfg.cols, cfg.fmax, data.frames);
  const SplineMode mode = mode_of(cfg);
  SketchFileHeader header;
  header.rows = cfg.rows;
  header.cols = cfg.cols;
  header.fmax = cfg.fmax;
  header.mode = mode;
  header.depth = cfg.lut_depth;
  header.format = fxp_format_of(cfg, mode);
  write_sketch_file(sketch_path, header, data.records);
  write_depth_map_file(truth_path, truth_map(scene));

  const CompressionRatios ratios = compression_ratio(sketch_config_of(cfg));
  std::printf("acquired %d frames of %dx%d pixels (photons=%" PRIu64 ")\n", cfg.fmax,
              cfg.rows, cfg.cols, data.photons);
  std::printf("saturation_events=%" PRIu64 "\n", data.saturation_events);
  std::printf("compression: frame_ratio=%.0f byte_ratio=%.6f\n", ratios.frame_ratio,
              ratios.byte_ratio);
  for (const fs::path& p : {ts_path, sketch_path, truth_path}) {
    std::printf("wrote %s checksum=0x%016" PRIx64 "\n", p.string().c_str(),
                fnv1a64_file(p));
  }
  return 0;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& sketch_arg,
                    const std::string& timestamps_arg, const std::string& truth_arg,
                    bool ref_cmm, int cmm_window) {
  const SketchFileData data = read_sketch_file(sketch_arg);
  const int rows = data.header.rows;
  const int cols = data.header.cols;

  ReconstructOptions opts;
  opts.mode = data.header.mode;
  opts.format = data.header.format;
  opts.background = background_of(cfg);
  opts.offset_bins = cfg.lut_offset_correction ? lut_offset_bins(data.header.depth) : 0.0;
  opts.threads = cfg.threads;

  const DepthMap depth = build_depth_map(data.records, rows, cols, opts);

  fs::create_directories(cfg.out_dir);
  const fs::path depth_path = fs::path(cfg.out_dir) / "depth.bin";
  write_depth_map_file(depth_path, depth);
  write_depth_map_csv(fs::path(cfg.out_dir) / "depth.csv", depth);
  std::printf("reconstructed %dx%d depth map (mode=%s depth=%d offset_bins=%.2f), %zu valid pixels\n",
              rows, cols, data.header.mode.name().c_str(), data.header.depth,
              opts.offset_bins, depth.valid_count());

  std::optional<TimestampData> timestamps;
  if (!timestamps_arg.empty()) {
    timestamps = read_timestamp_file(timestamps_arg);
    if (timestamps->rows != rows || timestamps->cols != cols) {
      throw ConfigError("reconstruct: timestamp array does not match the sketch file");
    }
    // offline full-precision pass over the same photons
    const auto flp = flp_sketch_map(timestamps->codes, rows, cols, timestamps->frames,
                                    data.header.mode, cfg.threads);
    const DepthMap flp_depth = depth_map_from_sketches(
        flp, rows, cols, data.header.mode, opts.background, 0.0, cfg.threads);
    write_depth_map_file(fs::path(cfg.out_dir) / "depth_flp.bin", flp_depth);

    const DepthMap diff = sketch_difference_map(normalized_sketches(data), flp, rows, cols);
    write_depth_map_file(fs::path(cfg.out_dir) / "sketch_absdiff.bin", diff);
    double worst = 0.0, sum = 0.0;
    size_t n = 0;
    for (double v : diff.tof_bins) {
      if (std::isnan(v)) continue;
      worst = std::max(worst, v);
      sum += v;
      ++n;
    }
    std::printf("online-vs-offline sketch |diff|: max=%.6f mean=%.6f over %zu pixels\n",
                worst, n ? sum / n : 0.0, n);

    const ErrorReport online_vs_offline = evaluate(depth, flp_depth);
    print_report_line("depth vs offline-flp", online_vs_offline);
  }

  std::optional<DepthMap> reference;
  std::string reference_name;
  if (!truth_arg.empty()) {
    reference = read_depth_map_file(truth_arg);
    reference_name = "truth";
  } else if (ref_cmm) {
    if (!timestamps) {
      throw ConfigError("reconstruct: --ref-cmm needs --timestamps");
    }
    reference = cmm_depth_map(timestamps->codes, rows, cols, timestamps->frames,
                              cmm_window, cfg.threads);
    write_depth_map_file(fs::path(cfg.out_dir) / "depth_cmm.bin", *reference);
    reference_name = "cmm";
  }

  if (reference) {
    if (reference->rows != rows || reference->cols != cols) {
      throw ConfigError("reconstruct: reference map does not match the sketch file");
    }
    ErrorReport report = evaluate(depth, *reference);
    SketchConfig ratio_cfg;
    ratio_cfg.rows = rows;
    ratio_cfg.cols = cols;
    ratio_cfg.fmax = data.header.fmax;
    const CompressionRatios ratios = compression_ratio(ratio_cfg);
    report.frame_ratio = ratios.frame_ratio;
    report.byte_ratio = ratios.byte_ratio;

    write_depth_map_file(fs::path(cfg.out_dir) / "error_map.bin", report.error_map);
    write_file_atomic(fs::path(cfg.out_dir) / "report.csv",
                      "reference,valid_pixels,mean_abs_error,rmse,mean_log_error,"
                      "frame_ratio,byte_ratio\n" +
                          reference_name + "," + report_csv_row(report) + "\n");
    print_report_line(("depth vs " + reference_name).c_str(), report);
  }
  return 0;
}

RunConfig apply_axis(const RunConfig& cfg, const std::string& axis, double value) {
  RunConfig point = cfg;
  if (axis == "lut_depth") {
    point.lut_depth = static_cast<int>(value);
  } else if (axis == "fxp_frac_bits") {
    point.fxp_frac_bits = static_cast<int>(value);
  } else if (axis == "detection_prob") {
    point.scene.detection_prob = value;
  }
  // stop_delay leaves the config alone; the delay is applied to the scene
  return point;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis, std::vector<double> values) {
  if (values.empty()) {
    if (axis == "lut_depth") values = {32, 64, 128, 256};
    else if (axis == "stop_delay") values = cfg.delays;
    else if (axis == "fxp_frac_bits") values = {4, 5, 6, 7};
    else if (axis == "detection_prob") values = {0.2, 0.4, 0.6, 0.8, 1.0};
  }
  if (values.empty()) throw ConfigError("sweep: no sweep values given");

  // every point must be valid before any work starts
  for (double v : values) validate_run_config(apply_axis(cfg, axis, v));

  std::string csv =
      "axis,value,valid_pixels,mean_abs_vs_truth,rmse_vs_truth,mean_log_vs_truth,"
      "mean_abs_vs_flp,rmse_vs_flp,mean_log_vs_flp,saturation_events,"
      "frame_ratio,byte_ratio\n";

  for (double v : values) {
    const RunConfig point = apply_axis(cfg, axis, v);
    Scene scene = build_scene(point);
    if (axis == "stop_delay") apply_stop_delay(scene, v);

    const AcquisitionData data = acquire(point, scene);
    const SplineMode mode = mode_of(point);
    const FxpFormat fmt = fxp_format_of(point, mode);

    ReconstructOptions opts;
    opts.mode = mode;
    opts.format = fmt;
    opts.background = background_of(point);
    opts.offset_bins =
        point.lut_offset_correction ? lut_offset_bins(point.lut_depth) : 0.0;
    opts.threads = point.threads;
    const DepthMap depth = build_depth_map(data.records, point.rows, point.cols, opts);

    const ErrorReport vs_truth = evaluate(depth, truth_map(scene));

    const auto flp = flp_sketch_map(data.frames, point.rows, point.cols, point.fmax,
                                    mode, point.threads);
    const DepthMap flp_depth = depth_map_from_sketches(
        flp, point.rows, point.cols, mode, opts.background, 0.0, point.threads);
    const ErrorReport vs_flp = evaluate(depth, flp_depth);

    const CompressionRatios ratios = compression_ratio(sketch_config_of(point));
    char row[384];
    std::snprintf(row, sizeof row,
                  "%s,%.9g,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%" PRIu64 ",%.9g,%.9g\n",
                  axis.c_str(), v, vs_truth.valid_pixels, vs_truth.mean_abs_error,
                  vs_truth.rmse, vs_truth.mean_log_error, vs_flp.mean_abs_error,
                  vs_flp.rmse, vs_flp.mean_log_error, data.saturation_events,
                  ratios.frame_ratio, ratios.byte_ratio);
    csv += row;
    std::printf("%s", row);
  }

  fs::create_directories(cfg.out_dir);
  const fs::path csv_path = fs::path(cfg.out_dir) / ("sweep_" + axis + ".csv");
  write_file_atomic(csv_path, csv);
  std::printf("wrote %s\n", csv_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spline-sketch compression pipeline for single-photon LiDAR"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  uint64_t seed = 0;
  int threads = -1;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Override the RNG seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  auto* out_opt = app.add_option("--out", out_dir, "Override the output directory");

  auto* genlut = app.add_subcommand("genlut", "Generate quantized spline ROM files");
  std::string genlut_mode = "all";
  genlut->add_option("--mode", genlut_mode, "p1, p2, fourier or all")
      ->check(CLI::IsMember({"p1", "p2", "fourier", "all"}));
  int genlut_depth = 0;
  genlut->add_option("--depth", genlut_depth, "Override the LUT depth");

  auto* acquire_cmd =
      app.add_subcommand("acquire", "Simulate an acquisition through the SPE array");
  double acquire_delay = 0.0;
  acquire_cmd->add_option("--delay", acquire_delay, "STOP delay in bins applied to the scene");

  auto* reconstruct =
      app.add_subcommand("reconstruct", "Solve a packed sketch file into a depth map");
  std::string sketch_arg, timestamps_arg, truth_arg;
  bool ref_cmm = false;
  int cmm_window = kDefaultCmmWindowBins;
  bool no_offset = false;
  reconstruct->add_option("sketch", sketch_arg, "Packed sketch file")->required();
  reconstruct->add_option("--timestamps", timestamps_arg,
                          "Timestamp stream for the offline reference pass");
  reconstruct->add_option("--truth", truth_arg, "Ground-truth depth map file");
  reconstruct->add_flag("--ref-cmm", ref_cmm,
                        "Use the local center-of-mass reference (needs --timestamps)");
  reconstruct->add_option("--cmm-window", cmm_window, "CMM half-window in bins");
  reconstruct->add_flag("--no-lut-offset", no_offset,
                        "Skip the (R_dc - 1)/2 LUT address-truncation offset");

  auto* sweep = app.add_subcommand("sweep", "Error metrics versus a swept parameter");
  std::string axis;
  std::vector<double> sweep_values;
  sweep->add_option("--axis", axis, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"lut_depth", "stop_delay", "fxp_frac_bits", "detection_prob"}));
  sweep->add_option("--values", sweep_values, "Sweep points (defaults per axis)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (threads_opt->count() > 0) cfg.threads = threads;
    if (out_opt->count() > 0) cfg.out_dir = out_dir;
    if (cfg.threads < 0) throw ConfigError("config: threads must be >= 0");

    if (genlut->parsed()) {
      if (genlut->count("--depth") > 0) cfg.lut_depth = genlut_depth;
      return cmd_genlut(cfg, genlut_mode);
    }
    if (acquire_cmd->parsed()) {
      return cmd_acquire(cfg, acquire_delay);
    }
    if (reconstruct->parsed()) {
      if (no_offset) cfg.lut_offset_correction = false;
      return cmd_reconstruct(cfg, sketch_arg, timestamps_arg, truth_arg, ref_cmm, cmm_window);
    }
    if (sweep->parsed()) {
      return cmd_sweep(cfg, axis, sweep_values);
    }
    return 2;  // unreachable with require_subcommand(1)
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
