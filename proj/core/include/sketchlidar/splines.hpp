#pragma once

// Continuous spline basis functions and the quantized ROM tables the sketch
// processing elements index. ROMs are immutable once built and safe to share
// across threads.

#include <cstdint>
#include <string>
#include <vector>

#include "sketchlidar/errors.hpp"
#include "sketchlidar/fxp.hpp"

namespace sketchlidar {

// Fixed by the sensor datapath: 12-bit TDC codes and four sketch lanes.
inline constexpr int kTimeBins = 4096;                     // T
inline constexpr int kSketchSize = 4;                      // M
inline constexpr int kCellBins = kTimeBins / kSketchSize;  // 1024

enum class SplineKind { polynomial, fourier };

class SplineMode {
 public:
  static SplineMode polynomial(int degree) {
    if (degree < 1 || degree > 2) {
      throw ConfigError("spline: polynomial degree must be 1 or 2, got " +
                        std::to_string(degree));
    }
    return SplineMode(SplineKind::polynomial, degree);
  }
  static SplineMode fourier() { return SplineMode(SplineKind::fourier, 0); }

  SplineKind kind() const { return kind_; }
  int degree() const { return degree_; }

  // Polynomial entries live in [0, 1); Fourier entries swing negative.
  bool needs_signed() const { return kind_ == SplineKind::fourier; }

  // Stable code used in the binary file headers: 1 = p1, 2 = p2, 3 = fourier.
  uint16_t file_code() const {
    return kind_ == SplineKind::fourier ? 3 : static_cast<uint16_t>(degree_);
  }
  static SplineMode from_file_code(uint16_t code) {
    switch (code) {
      case 1: return polynomial(1);
      case 2: return polynomial(2);
      case 3: return fourier();
      default: throw IoError("unknown spline mode code " + std::to_string(code));
    }
  }

  std::string name() const {
    return kind_ == SplineKind::fourier ? "fourier" : "p" + std::to_string(degree_);
  }
  static SplineMode from_name(const std::string& name) {
    if (name == "p1") return polynomial(1);
    if (name == "p2") return polynomial(2);
    if (name == "fourier") return fourier();
    throw ConfigError("unknown spline mode '" + name + "' (expected p1, p2 or fourier)");
  }

  friend bool operator==(const SplineMode&, const SplineMode&) = default;

 private:
  SplineMode(SplineKind kind, int degree) : kind_(kind), degree_(degree) {}
  SplineKind kind_;
  int degree_;
};

// Basis value at t in [0, kSketchSize). Polynomial modes are the causal
// cardinal B-splines N_p with support [0, p+1]; Fourier is one full-period
// cosine, cos(2*pi*t / kSketchSize). Throws std::invalid_argument outside
// the domain.
double spline_basis_eval(SplineMode mode, double t);

class SketchRom {
 public:
  SketchRom(SplineMode mode, int depth, FxpFormat fmt, std::vector<int64_t> raws);

  SplineMode mode() const { return mode_; }
  int depth() const { return depth_; }
  const FxpFormat& format() const { return fmt_; }

  // Constant-time fetch; throws std::out_of_range on a bad address.
  FxpValue lookup(int addr) const;
  int64_t raw(int addr) const { return raws_[static_cast<size_t>(addr)]; }
  const std::vector<int64_t>& raws() const { return raws_; }

 private:
  SplineMode mode_;
  int depth_;
  FxpFormat fmt_;
  std::vector<int64_t> raws_;
};

bool is_valid_rom_depth(int depth);  // {32, 64, 128, 256, 512}

// Quantize the basis into a depth-entry table. Entry b holds the basis at
// t = b * kSketchSize / depth, clamped to magnitude 1 - 2^-F so a full frame
// budget of adds can never overflow the accumulator format.
SketchRom build_rom(SplineMode mode, int depth, FxpFormat fmt);

struct SketchConfig {
  int t_bins = kTimeBins;
  int m = kSketchSize;
  int delta = kCellBins;
  int rows = 192;
  int cols = 128;
  int fmax = 512;
};

// Full-strictness gate run before an acquisition starts. The SPE emulator
// itself accepts any fmax so overflow behaviour can be probed directly.
void validate_config(const SketchConfig& cfg, const FxpFormat& fmt);

}  // namespace sketchlidar
