#pragma once

// Bit-accurate emulation of the four streaming sketch processing elements:
// modulo unit, LUT address shift, ROM fetch, saturating BRAM accumulation,
// the photon-count path, frame gating and FIFO word packing.

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "sketchlidar/splines.hpp"

namespace sketchlidar {

struct SpadTimestamp {
  uint16_t code = 0;  // 0 = no photon this frame; valid photon codes are 1..4095

  bool has_photon() const { return code != 0; }
  friend bool operator==(const SpadTimestamp&, const SpadTimestamp&) = default;
};

// B = (X - i*1024) mod 4096 via the hardware path: one subtract, one compare,
// one conditional add. Valid for code in [0, 4096) and sketch_index in [0, 4).
inline int modulo_unit(int code, int sketch_index) {
  const int d = code - (sketch_index << 10);
  return d < 0 ? d + kTimeBins : d;
}

// addr = B >> (log2(4096) - log2(depth)); depth must be a power of two.
inline int lut_address(int b, int depth) {
  const int shift = 12 - std::countr_zero(static_cast<unsigned>(depth));
  return b >> shift;
}

struct PackedSketchRecord {
  uint32_t fifo1_word = 0;  // sketch 0 in the low 16 bits, sketch 1 in the high 16
  uint32_t fifo2_word = 0;  // sketch 2 low, sketch 3 high
  uint32_t pc_word = 0;     // photon count in the low 16 bits, zero padding above

  friend bool operator==(const PackedSketchRecord&, const PackedSketchRecord&) = default;
};

// Packs the four accumulator raws (low 16 bits each, two's complement) and the
// photon count. Lossless for any format of at most 16 total bits.
PackedSketchRecord pack_record(const std::array<int64_t, kSketchSize>& raws,
                               uint32_t photon_count);

struct UnpackedRecord {
  std::array<int64_t, kSketchSize> raws{};
  uint32_t photon_count = 0;
};

// Exact inverse of pack_record under the given format's signedness.
UnpackedRecord unpack_record(const PackedSketchRecord& rec, const FxpFormat& fmt);

class SpeArray {
 public:
  // The emulator checks mechanical preconditions only (dimensions, 16-bit
  // lanes). The fmax-vs-format overflow budget is enforced by
  // validate_config, the gate real acquisitions go through.
  SpeArray(SketchConfig cfg, SketchRom rom);

  // One pixel, one frame. code 0 leaves the pixel untouched, including the
  // photon count; a photon adds one ROM entry to each of the four sketches.
  void step(int row, int col, SpadTimestamp ts);

  // Applies step to every pixel in row-major order, then advances the frame
  // index. Throws std::logic_error once the acquisition is complete.
  void run_frame(std::span<const SpadTimestamp> frame);

  // Packs all pixels in row-major order and resets accumulators, counts and
  // the frame index. saturation_events is preserved for inspection. Throws
  // std::logic_error unless frame_index == fmax.
  std::vector<PackedSketchRecord> readout();

  int frame_index() const { return frame_index_; }
  uint64_t saturation_events() const { return saturation_events_; }
  const SketchConfig& config() const { return cfg_; }
  const SketchRom& rom() const { return rom_; }

  int64_t accumulator(int row, int col, int sketch) const;
  uint32_t photon_count(int row, int col) const;

 private:
  size_t pixel_index(int row, int col) const;

  SketchConfig cfg_;
  SketchRom rom_;
  int32_t raw_min_;
  int32_t raw_max_;
  int frame_index_ = 0;
  uint64_t saturation_events_ = 0;
  std::vector<int32_t> accum_;          // rows * cols * kSketchSize
  std::vector<uint16_t> photon_counts_; // rows * cols
};

}  // namespace sketchlidar
