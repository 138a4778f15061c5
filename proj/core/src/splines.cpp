#include "sketchlidar/splines.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sketchlidar {

namespace {

// Hat function: box * box.
double cardinal_b1(double t) {
  if (t < 0.0 || t >= 2.0) return 0.0;
  return t < 1.0 ? t : 2.0 - t;
}

// Piecewise quadratic: box * box * box.
double cardinal_b2(double t) {
  if (t < 0.0 || t >= 3.0) return 0.0;
  if (t < 1.0) return 0.5 * t * t;
  if (t < 2.0) return 0.5 * (-2.0 * t * t + 6.0 * t - 3.0);
  const double u = 3.0 - t;
  return 0.5 * u * u;
}

}  // namespace

double spline_basis_eval(SplineMode mode, double t) {
  if (!(t >= 0.0) || t >= static_cast<double>(kSketchSize)) {
    throw std::invalid_argument("spline_basis_eval: t=" + std::to_string(t) +
                                " outside [0, " + std::to_string(kSketchSize) + ")");
  }
  switch (mode.kind()) {
    case SplineKind::polynomial:
      return mode.degree() == 1 ? cardinal_b1(t) : cardinal_b2(t);
    case SplineKind::fourier:
      return std::cos(2.0 * std::numbers::pi * t / kSketchSize);
  }
  return 0.0;  // unreachable
}

SketchRom::SketchRom(SplineMode mode, int depth, FxpFormat fmt, std::vector<int64_t> raws)
    : mode_(mode), depth_(depth), fmt_(fmt), raws_(std::move(raws)) {
  if (!is_valid_rom_depth(depth_)) {
    throw ConfigError("rom: invalid depth " + std::to_string(depth_));
  }
  if (raws_.size() != static_cast<size_t>(depth_)) {
    throw ConfigError("rom: entry count does not match depth");
  }
  for (int64_t r : raws_) {
    if (r < fmt_.raw_min() || r > fmt_.raw_max()) {
      throw ConfigError("rom: entry outside format range");
    }
  }
}

FxpValue SketchRom::lookup(int addr) const {
  if (addr < 0 || addr >= depth_) {
    throw std::out_of_range("rom: address " + std::to_string(addr) +
                            " outside [0, " + std::to_string(depth_) + ")");
  }
  return {raws_[static_cast<size_t>(addr)], fmt_};
}

bool is_valid_rom_depth(int depth) {
  return depth == 32 || depth == 64 || depth == 128 || depth == 256 || depth == 512;
}

SketchRom build_rom(SplineMode mode, int depth, FxpFormat fmt) {
  if (!is_valid_rom_depth(depth)) {
    throw ConfigError("build_rom: depth must be one of {32, 64, 128, 256, 512}, got " +
                      std::to_string(depth));
  }
  if (fmt.is_signed() != mode.needs_signed()) {
    throw ConfigError("build_rom: " + mode.name() + " requires " +
                      (mode.needs_signed() ? "a signed" : "an unsigned") + " format");
  }
  // Magnitude cap keeping fmax = 2^(I-F) frames of accumulation overflow-free.
  const double limit = 1.0 - fmt.step();
  std::vector<int64_t> raws(static_cast<size_t>(depth));
  for (int b = 0; b < depth; ++b) {
    const double t = static_cast<double>(b) * kSketchSize / depth;
    double v = spline_basis_eval(mode, t);
    v = std::min(v, limit);
    if (mode.needs_signed()) v = std::max(v, -limit);
    const FxpResult q = fxp_quantize(v, fmt);
    raws[static_cast<size_t>(b)] = q.value.raw;
  }
  return SketchRom(mode, depth, fmt, std::move(raws));
}

void validate_config(const SketchConfig& cfg, const FxpFormat& fmt) {
  if (cfg.t_bins != kTimeBins) {
    throw ConfigError("config: t_bins must be " + std::to_string(kTimeBins));
  }
  if (cfg.m != kSketchSize) {
    throw ConfigError("config: sketch size must be " + std::to_string(kSketchSize) +
                      " (fixed by the FIFO packing)");
  }
  if (cfg.delta * cfg.m != cfg.t_bins) {
    throw ConfigError("config: delta * m must equal t_bins");
  }
  if (cfg.rows <= 0 || cfg.cols <= 0) {
    throw ConfigError("config: array dimensions must be positive");
  }
  if (cfg.fmax < 1) {
    throw ConfigError("config: fmax must be at least 1");
  }
  const int64_t budget = frame_budget(fmt);
  if (cfg.fmax > budget) {
    throw ConfigError("config: fmax=" + std::to_string(cfg.fmax) +
                      " exceeds the overflow budget of " + std::to_string(budget) +
                      " frames for this format");
  }
}

}  // namespace sketchlidar
