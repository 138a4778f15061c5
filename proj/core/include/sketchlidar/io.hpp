#pragma once

// On-disk formats, all little-endian and bit-exact:
//
//   ROM file   "SKRM": magic[4] | mode u8 | log2(depth) u8 | I u8 | F u8,
//              then depth x u16 raw entries (two's complement when signed).
//   Timestamps "SKTS": magic[4] | rows u32 | cols u32 | frames u32 | t_bins u32,
//              then frames x rows x cols u16 codes, frame-major, row-major.
//   Sketches   "SKZF": magic[4] | rows u32 | cols u32 | fmax u32 |
//              mode u16 | depth u16 | I u16 | F u16, then one 12-byte record
//              per pixel (fifo1 u32, fifo2 u32, pc u32), row-major.
//   Depth map  "SKDM": magic[4] | rows u32 | cols u32, then rows x cols f32
//              bins; invalid pixels carry the canonical quiet NaN 0x7FC00000.
//
// Every write goes through a temp file + rename, so interrupted runs never
// leave a half-written artifact. Readers throw IoError on any mismatch.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sketchlidar/reference.hpp"

namespace sketchlidar {

void write_rom_file(const std::filesystem::path& path, const SketchRom& rom);
SketchRom read_rom_file(const std::filesystem::path& path);

void write_timestamp_file(const std::filesystem::path& path, int rows, int cols,
                          int frames, std::span<const SpadTimestamp> codes);

struct TimestampData {
  int rows = 0;
  int cols = 0;
  int frames = 0;
  std::vector<SpadTimestamp> codes;  // frame-major

  std::span<const SpadTimestamp> frame(int index) const {
    const size_t pixels = static_cast<size_t>(rows) * cols;
    return {codes.data() + static_cast<size_t>(index) * pixels, pixels};
  }
};

TimestampData read_timestamp_file(const std::filesystem::path& path);

struct SketchFileHeader {
  int rows = 0;
  int cols = 0;
  int fmax = 0;
  SplineMode mode = SplineMode::polynomial(1);
  int depth = 256;
  FxpFormat format{16, 7, false};
};

void write_sketch_file(const std::filesystem::path& path, const SketchFileHeader& header,
                       std::span<const PackedSketchRecord> records);

struct SketchFileData {
  SketchFileHeader header;
  std::vector<PackedSketchRecord> records;
};

SketchFileData read_sketch_file(const std::filesystem::path& path);

void write_depth_map_file(const std::filesystem::path& path, const DepthMap& map);
DepthMap read_depth_map_file(const std::filesystem::path& path);

// row,col,tof_bins,meters per line; invalid pixels print "nan".
void write_depth_map_csv(const std::filesystem::path& path, const DepthMap& map);

// Atomic text/bytes write used for every artifact, CSVs included.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

uint64_t fnv1a64(std::span<const unsigned char> bytes);
uint64_t fnv1a64_file(const std::filesystem::path& path);

}  // namespace sketchlidar
