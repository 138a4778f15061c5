#include "sketchlidar/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace sketchlidar {

namespace {

constexpr uint32_t kCanonicalNanBits = 0x7FC00000u;

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, uint32_t v) {
  put_u16(out, static_cast<uint16_t>(v & 0xFFFF));
  put_u16(out, static_cast<uint16_t>(v >> 16));
}

uint16_t get_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return bytes;
}

const unsigned char* check_header(const std::string& bytes, const char magic[4],
                                  size_t min_size, const std::filesystem::path& path) {
  if (bytes.size() < min_size) throw IoError("truncated file " + path.string());
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    throw IoError("bad magic in " + path.string());
  }
  return reinterpret_cast<const unsigned char*>(bytes.data());
}

void expect_size(const std::string& bytes, size_t expected,
                 const std::filesystem::path& path) {
  if (bytes.size() != expected) {
    throw IoError("file " + path.string() + " has " + std::to_string(bytes.size()) +
                  " bytes, expected " + std::to_string(expected));
  }
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

void write_rom_file(const std::filesystem::path& path, const SketchRom& rom) {
  if (rom.format().total_bits() > 16) {
    throw IoError("rom file entries are 16-bit; format does not fit");
  }
  std::string bytes;
  bytes.reserve(8 + static_cast<size_t>(rom.depth()) * 2);
  bytes.append("SKRM", 4);
  bytes.push_back(static_cast<char>(rom.mode().file_code()));
  bytes.push_back(static_cast<char>(std::countr_zero(static_cast<unsigned>(rom.depth()))));
  bytes.push_back(static_cast<char>(rom.format().total_bits()));
  bytes.push_back(static_cast<char>(rom.format().frac_bits()));
  for (int b = 0; b < rom.depth(); ++b) {
    put_u16(bytes, static_cast<uint16_t>(rom.raw(b) & 0xFFFF));
  }
  write_file_atomic(path, bytes);
}

SketchRom read_rom_file(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  const unsigned char* p = check_header(bytes, "SKRM", 8, path);
  SplineMode mode = SplineMode::from_file_code(p[4]);
  const int depth = 1 << p[5];
  if (!is_valid_rom_depth(depth)) throw IoError("invalid rom depth in " + path.string());
  const int total_bits = p[6];
  const int frac_bits = p[7];
  if (total_bits < 2 || total_bits > 16 || frac_bits < 1 || frac_bits >= total_bits) {
    throw IoError("invalid fxp format in " + path.string());
  }
  expect_size(bytes, 8 + static_cast<size_t>(depth) * 2, path);
  const FxpFormat fmt(total_bits, frac_bits, mode.needs_signed());
  std::vector<int64_t> raws(static_cast<size_t>(depth));
  for (int b = 0; b < depth; ++b) {
    const uint16_t bits = get_u16(p + 8 + b * 2);
    raws[static_cast<size_t>(b)] =
        fmt.is_signed() ? static_cast<int16_t>(bits) : static_cast<int64_t>(bits);
    if (raws[static_cast<size_t>(b)] < fmt.raw_min() ||
        raws[static_cast<size_t>(b)] > fmt.raw_max()) {
      throw IoError("rom entry outside format range in " + path.string());
    }
  }
  return SketchRom(mode, depth, fmt, std::move(raws));
}

void write_timestamp_file(const std::filesystem::path& path, int rows, int cols,
                          int frames, std::span<const SpadTimestamp> codes) {
  const size_t expected = static_cast<size_t>(rows) * cols * static_cast<size_t>(frames);
  if (codes.size() != expected) {
    throw std::invalid_argument("timestamp file: code count does not match header");
  }
  std::string bytes;
  bytes.reserve(20 + codes.size() * 2);
  bytes.append("SKTS", 4);
  put_u32(bytes, static_cast<uint32_t>(rows));
  put_u32(bytes, static_cast<uint32_t>(cols));
  put_u32(bytes, static_cast<uint32_t>(frames));
  put_u32(bytes, static_cast<uint32_t>(kTimeBins));
  for (SpadTimestamp ts : codes) put_u16(bytes, ts.code);
  write_file_atomic(path, bytes);
}

TimestampData read_timestamp_file(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  const unsigned char* p = check_header(bytes, "SKTS", 20, path);
  TimestampData data;
  data.rows = static_cast<int>(get_u32(p + 4));
  data.cols = static_cast<int>(get_u32(p + 8));
  data.frames = static_cast<int>(get_u32(p + 12));
  const uint32_t t_bins = get_u32(p + 16);
  if (data.rows <= 0 || data.cols <= 0 || data.frames < 0 || t_bins != kTimeBins) {
    throw IoError("invalid timestamp header in " + path.string());
  }
  const size_t n = static_cast<size_t>(data.rows) * data.cols * static_cast<size_t>(data.frames);
  expect_size(bytes, 20 + n * 2, path);
  data.codes.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const uint16_t code = get_u16(p + 20 + i * 2);
    if (code >= kTimeBins) throw IoError("timestamp code out of range in " + path.string());
    data.codes[i].code = code;
  }
  return data;
}

void write_sketch_file(const std::filesystem::path& path, const SketchFileHeader& header,
                       std::span<const PackedSketchRecord> records) {
  const size_t pixels = static_cast<size_t>(header.rows) * header.cols;
  if (records.size() != pixels) {
    throw std::invalid_argument("sketch file: record count does not match header");
  }
  std::string bytes;
  bytes.reserve(24 + records.size() * 12);
  bytes.append("SKZF", 4);
  put_u32(bytes, static_cast<uint32_t>(header.rows));
  put_u32(bytes, static_cast<uint32_t>(header.cols));
  put_u32(bytes, static_cast<uint32_t>(header.fmax));
  put_u16(bytes, header.mode.file_code());
  put_u16(bytes, static_cast<uint16_t>(header.depth));
  put_u16(bytes, static_cast<uint16_t>(header.format.total_bits()));
  put_u16(bytes, static_cast<uint16_t>(header.format.frac_bits()));
  for (const PackedSketchRecord& rec : records) {
    put_u32(bytes, rec.fifo1_word);
    put_u32(bytes, rec.fifo2_word);
    put_u32(bytes, rec.pc_word);
  }
  write_file_atomic(path, bytes);
}

SketchFileData read_sketch_file(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  const unsigned char* p = check_header(bytes, "SKZF", 24, path);
  SketchFileData data;
  data.header.rows = static_cast<int>(get_u32(p + 4));
  data.header.cols = static_cast<int>(get_u32(p + 8));
  data.header.fmax = static_cast<int>(get_u32(p + 12));
  data.header.mode = SplineMode::from_file_code(get_u16(p + 16));
  data.header.depth = get_u16(p + 18);
  const int total_bits = get_u16(p + 20);
  const int frac_bits = get_u16(p + 22);
  if (data.header.rows <= 0 || data.header.cols <= 0 || data.header.fmax < 1 ||
      !is_valid_rom_depth(data.header.depth) || total_bits < 2 || total_bits > 16 ||
      frac_bits < 1 || frac_bits >= total_bits) {
    throw IoError("invalid sketch header in " + path.string());
  }
  data.header.format = FxpFormat(total_bits, frac_bits, data.header.mode.needs_signed());
  const size_t pixels = static_cast<size_t>(data.header.rows) * data.header.cols;
  expect_size(bytes, 24 + pixels * 12, path);
  data.records.resize(pixels);
  for (size_t i = 0; i < pixels; ++i) {
    const unsigned char* rec = p + 24 + i * 12;
    data.records[i].fifo1_word = get_u32(rec);
    data.records[i].fifo2_word = get_u32(rec + 4);
    data.records[i].pc_word = get_u32(rec + 8);
  }
  return data;
}

void write_depth_map_file(const std::filesystem::path& path, const DepthMap& map) {
  std::string bytes;
  bytes.reserve(12 + map.tof_bins.size() * 4);
  bytes.append("SKDM", 4);
  put_u32(bytes, static_cast<uint32_t>(map.rows));
  put_u32(bytes, static_cast<uint32_t>(map.cols));
  for (double v : map.tof_bins) {
    const uint32_t bits = std::isnan(v)
                              ? kCanonicalNanBits
                              : std::bit_cast<uint32_t>(static_cast<float>(v));
    put_u32(bytes, bits);
  }
  write_file_atomic(path, bytes);
}

DepthMap read_depth_map_file(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  const unsigned char* p = check_header(bytes, "SKDM", 12, path);
  const int rows = static_cast<int>(get_u32(p + 4));
  const int cols = static_cast<int>(get_u32(p + 8));
  if (rows <= 0 || cols <= 0) throw IoError("invalid depth map header in " + path.string());
  const size_t pixels = static_cast<size_t>(rows) * cols;
  expect_size(bytes, 12 + pixels * 4, path);
  DepthMap map = DepthMap::invalid(rows, cols);
  for (size_t i = 0; i < pixels; ++i) {
    const float f = std::bit_cast<float>(get_u32(p + 12 + i * 4));
    if (!std::isnan(f)) map.tof_bins[i] = f;
  }
  return map;
}

void write_depth_map_csv(const std::filesystem::path& path, const DepthMap& map) {
  std::string out = "row,col,tof_bins,meters\n";
  char line[96];
  for (int r = 0; r < map.rows; ++r) {
    for (int c = 0; c < map.cols; ++c) {
      if (map.is_valid(r, c)) {
        std::snprintf(line, sizeof line, "%d,%d,%.9g,%.9g\n", r, c, map.at(r, c),
                      map.meters_at(r, c));
      } else {
        std::snprintf(line, sizeof line, "%d,%d,nan,nan\n", r, c);
      }
      out += line;
    }
  }
  write_file_atomic(path, out);
}

uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

uint64_t fnv1a64_file(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  return fnv1a64({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

}  // namespace sketchlidar
