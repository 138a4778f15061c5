#include "sketchlidar/spe.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sketchlidar {

PackedSketchRecord pack_record(const std::array<int64_t, kSketchSize>& raws,
                               uint32_t photon_count) {
  const auto half = [](int64_t raw) {
    return static_cast<uint32_t>(static_cast<uint16_t>(raw & 0xFFFF));
  };
  PackedSketchRecord rec;
  rec.fifo1_word = half(raws[0]) | (half(raws[1]) << 16);
  rec.fifo2_word = half(raws[2]) | (half(raws[3]) << 16);
  rec.pc_word = photon_count & 0xFFFFu;
  return rec;
}

UnpackedRecord unpack_record(const PackedSketchRecord& rec, const FxpFormat& fmt) {
  const auto lane = [&fmt](uint32_t word, int high) -> int64_t {
    const uint16_t bits = static_cast<uint16_t>(high ? word >> 16 : word & 0xFFFF);
    if (fmt.is_signed()) return static_cast<int16_t>(bits);
    return bits;
  };
  UnpackedRecord out;
  out.raws = {lane(rec.fifo1_word, 0), lane(rec.fifo1_word, 1),
              lane(rec.fifo2_word, 0), lane(rec.fifo2_word, 1)};
  out.photon_count = rec.pc_word & 0xFFFFu;
  return out;
}

SpeArray::SpeArray(SketchConfig cfg, SketchRom rom)
    : cfg_(cfg),
      rom_(std::move(rom)),
      raw_min_(static_cast<int32_t>(rom_.format().raw_min())),
      raw_max_(static_cast<int32_t>(rom_.format().raw_max())) {
  if (cfg_.rows <= 0 || cfg_.cols <= 0) {
    throw ConfigError("spe: array dimensions must be positive");
  }
  if (cfg_.t_bins != kTimeBins || cfg_.m != kSketchSize || cfg_.delta != kCellBins) {
    throw ConfigError("spe: datapath is fixed at T=4096, M=4, delta=1024");
  }
  if (cfg_.fmax < 1) {
    throw ConfigError("spe: fmax must be at least 1");
  }
  if (rom_.format().total_bits() > 16) {
    throw ConfigError("spe: accumulator lanes are 16 bits wide; format I=" +
                      std::to_string(rom_.format().total_bits()) + " does not fit");
  }
  const size_t pixels = static_cast<size_t>(cfg_.rows) * cfg_.cols;
  accum_.assign(pixels * kSketchSize, 0);
  photon_counts_.assign(pixels, 0);
}

size_t SpeArray::pixel_index(int row, int col) const {
  if (row < 0 || row >= cfg_.rows || col < 0 || col >= cfg_.cols) {
    throw std::invalid_argument("spe: pixel (" + std::to_string(row) + ", " +
                                std::to_string(col) + ") outside the array");
  }
  return static_cast<size_t>(row) * cfg_.cols + col;
}

void SpeArray::step(int row, int col, SpadTimestamp ts) {
  const size_t pixel = pixel_index(row, col);
  if (!ts.has_photon()) return;
  if (ts.code >= kTimeBins) {
    throw std::invalid_argument("spe: timestamp code " + std::to_string(ts.code) +
                                " outside [0, 4096)");
  }
  const int depth = rom_.depth();
  int32_t* acc = accum_.data() + pixel * kSketchSize;
  for (int i = 0; i < kSketchSize; ++i) {
    const int addr = lut_address(modulo_unit(ts.code, i), depth);
    const int64_t sum = static_cast<int64_t>(acc[i]) + rom_.raw(addr);
    if (sum > raw_max_) {
      acc[i] = raw_max_;
      ++saturation_events_;
    } else if (sum < raw_min_) {
      acc[i] = raw_min_;
      ++saturation_events_;
    } else {
      acc[i] = static_cast<int32_t>(sum);
    }
  }
  if (photon_counts_[pixel] < 0xFFFF) ++photon_counts_[pixel];
}

void SpeArray::run_frame(std::span<const SpadTimestamp> frame) {
  if (frame_index_ >= cfg_.fmax) {
    throw std::logic_error("spe: acquisition already complete (fmax=" +
                           std::to_string(cfg_.fmax) + ")");
  }
  const size_t pixels = static_cast<size_t>(cfg_.rows) * cfg_.cols;
  if (frame.size() != pixels) {
    throw std::invalid_argument("spe: frame has " + std::to_string(frame.size()) +
                                " entries, expected " + std::to_string(pixels));
  }
  for (int r = 0; r < cfg_.rows; ++r) {
    for (int c = 0; c < cfg_.cols; ++c) {
      step(r, c, frame[static_cast<size_t>(r) * cfg_.cols + c]);
    }
  }
  ++frame_index_;
}

std::vector<PackedSketchRecord> SpeArray::readout() {
  if (frame_index_ != cfg_.fmax) {
    throw std::logic_error("spe: readout at frame " + std::to_string(frame_index_) +
                           " before fmax=" + std::to_string(cfg_.fmax));
  }
  const size_t pixels = static_cast<size_t>(cfg_.rows) * cfg_.cols;
  std::vector<PackedSketchRecord> records;
  records.reserve(pixels);
  for (size_t p = 0; p < pixels; ++p) {
    const int32_t* acc = accum_.data() + p * kSketchSize;
    records.push_back(pack_record({acc[0], acc[1], acc[2], acc[3]}, photon_counts_[p]));
  }
  std::fill(accum_.begin(), accum_.end(), 0);
  std::fill(photon_counts_.begin(), photon_counts_.end(), 0);
  frame_index_ = 0;
  return records;
}

int64_t SpeArray::accumulator(int row, int col, int sketch) const {
  if (sketch < 0 || sketch >= kSketchSize) {
    throw std::invalid_argument("spe: sketch index outside [0, 4)");
  }
  return accum_[pixel_index(row, col) * kSketchSize + static_cast<size_t>(sketch)];
}

uint32_t SpeArray::photon_count(int row, int col) const {
  return photon_counts_[pixel_index(row, col)];
}

}  // namespace sketchlidar
