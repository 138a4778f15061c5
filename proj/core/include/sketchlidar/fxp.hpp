#pragma once

// Fixed-point <I,F> values and the saturating arithmetic used by the sketch
// accumulators and ROM entries. Raw integers are the currency; the real value
// of a raw r is exactly r * 2^-F.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "sketchlidar/errors.hpp"

namespace sketchlidar {

class FxpFormat {
 public:
  FxpFormat(int total_bits, int frac_bits, bool is_signed)
      : total_bits_(total_bits), frac_bits_(frac_bits), is_signed_(is_signed) {
    if (frac_bits < 1 || frac_bits >= total_bits) {
      throw ConfigError("fxp: need 1 <= F < I, got I=" + std::to_string(total_bits) +
                        " F=" + std::to_string(frac_bits));
    }
    const int max_total = is_signed ? 64 : 63;  // raws are stored in int64_t
    if (total_bits > max_total) {
      throw ConfigError("fxp: I=" + std::to_string(total_bits) + " exceeds " +
                        std::to_string(max_total) + "-bit storage for this signedness");
    }
  }

  int total_bits() const { return total_bits_; }
  int frac_bits() const { return frac_bits_; }
  bool is_signed() const { return is_signed_; }

  int64_t raw_min() const { return is_signed_ ? -(int64_t{1} << (total_bits_ - 1)) : 0; }
  int64_t raw_max() const {
    const int value_bits = is_signed_ ? total_bits_ - 1 : total_bits_;
    return ((int64_t{1} << (value_bits - 1)) - 1) * 2 + 1;  // 2^value_bits - 1
  }

  double step() const { return std::ldexp(1.0, -frac_bits_); }
  double real_min() const { return std::ldexp(static_cast<double>(raw_min()), -frac_bits_); }
  double real_max() const { return std::ldexp(static_cast<double>(raw_max()), -frac_bits_); }

  friend bool operator==(const FxpFormat&, const FxpFormat&) = default;

 private:
  int total_bits_;
  int frac_bits_;
  bool is_signed_;
};

struct FxpValue {
  int64_t raw = 0;
  FxpFormat format;

  double to_real() const { return std::ldexp(static_cast<double>(raw), -format.frac_bits()); }
};

// Arithmetic reports saturation through a flag instead of throwing: overflow
// is an expected, observable condition of the emulated datapath.
struct FxpResult {
  FxpValue value;
  bool saturated = false;
};

// Round to nearest, ties away from zero. Out-of-range inputs clamp to the
// nearest representable extreme and set the flag.
inline FxpResult fxp_quantize(double x, FxpFormat fmt) {
  if (std::isnan(x)) throw std::invalid_argument("fxp_quantize: NaN input");
  if (x > fmt.real_max()) return {{fmt.raw_max(), fmt}, true};
  if (x < fmt.real_min()) return {{fmt.raw_min(), fmt}, true};
  return {{std::llround(std::ldexp(x, fmt.frac_bits())), fmt}, false};
}

inline FxpResult fxp_add_saturating(FxpValue a, FxpValue b) {
  if (!(a.format == b.format)) {
    throw std::invalid_argument("fxp_add_saturating: mismatched formats");
  }
  const __int128 sum = static_cast<__int128>(a.raw) + b.raw;
  if (sum > a.format.raw_max()) return {{a.format.raw_max(), a.format}, true};
  if (sum < a.format.raw_min()) return {{a.format.raw_min(), a.format}, true};
  return {{static_cast<int64_t>(sum), a.format}, false};
}

inline double fxp_to_real(FxpValue v) { return v.to_real(); }

// Frames that can accumulate without overflow when every per-frame addend is
// below 1.0: 2^(I-F) for unsigned formats, 2^(I-F-1) for signed ones.
inline int64_t frame_budget(FxpFormat fmt) {
  const int int_bits = fmt.total_bits() - fmt.frac_bits() - (fmt.is_signed() ? 1 : 0);
  return int64_t{1} << int_bits;
}

}  // namespace sketchlidar
