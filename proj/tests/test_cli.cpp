// Drives the installed binary end to end through a shell: exit codes, output
// artifacts, determinism. The binary path arrives via SKETCHLIDAR_CLI.

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sketchlidar/io.hpp"

using namespace sketchlidar;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

std::string cli_path() {
  const char* env = std::getenv("SKETCHLIDAR_CLI");
  REQUIRE_MESSAGE(env != nullptr, "SKETCHLIDAR_CLI must point at the binary");
  return env;
}

RunResult run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buf;
  while (size_t n = fread(buf.data(), 1, buf.size(), pipe)) {
    result.output.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sketchlidar_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Small, fast configuration shared by the round-trip tests.
fs::path write_small_config(const TempDir& dir, const std::string& extra = "") {
  const fs::path path = dir.path / "config.json";
  const std::string json = R"({
  "mode": "p1",
  "lut_depth": 64,
  "rows": 16, "cols": 16, "fmax": 64,
  "seed": 7,
  "threads": 2,
  "scene": {
    "type": "two_depth",
    "fg_bins": 1100.5, "bg_bins": 2600.25,
    "mask": "rect",
    "detection_prob": 0.95, "signal_fraction": 0.98
  },
  "irf": {"shape": "gaussian", "fwhm_bins": 50.0})" +
                           extra + "\n}\n";
  std::ofstream out(path);
  out << json;
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("help and missing subcommand") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
}

TEST_CASE("genlut writes one rom per mode, deterministically") {
  TempDir dir;
  const std::string out1 = (dir.path / "a").string();
  const std::string out2 = (dir.path / "b").string();

  const RunResult first = run("genlut --out " + out1 + " --depth 256");
  REQUIRE(first.exit_code == 0);
  CHECK(first.output.find("checksum=0x") != std::string::npos);
  for (const char* name : {"rom_p1_d256.bin", "rom_p2_d256.bin", "rom_fourier_d256.bin"}) {
    CHECK(fs::exists(fs::path(out1) / name));
  }

  const RunResult second = run("genlut --out " + out2 + " --depth 256");
  REQUIRE(second.exit_code == 0);
  CHECK(slurp(fs::path(out1) / "rom_p1_d256.bin") == slurp(fs::path(out2) / "rom_p1_d256.bin"));
  CHECK(slurp(fs::path(out1) / "rom_fourier_d256.bin") ==
        slurp(fs::path(out2) / "rom_fourier_d256.bin"));

  // entry 64 of the p1 table holds the clamped peak
  const SketchRom rom = read_rom_file(fs::path(out1) / "rom_p1_d256.bin");
  CHECK(rom.raw(64) == 127);
}

TEST_CASE("genlut rejects a bad depth with exit code 2") {
  TempDir dir;
  CHECK(run("genlut --out " + (dir.path / "x").string() + " --depth 0").exit_code == 2);
  CHECK(run("genlut --out " + (dir.path / "x").string() + " --depth 100").exit_code == 2);
}

TEST_CASE("acquire then reconstruct round-trips, byte-identically on re-run") {
  TempDir dir;
  const fs::path config = write_small_config(dir);
  const std::string out = (dir.path / "run").string();

  const RunResult acq = run("acquire --config " + config.string() + " --out " + out);
  REQUIRE_MESSAGE(acq.exit_code == 0, acq.output);
  CHECK(acq.output.find("saturation_events=0") != std::string::npos);
  CHECK(acq.output.find("frame_ratio=64") != std::string::npos);
  REQUIRE(fs::exists(fs::path(out) / "sketch.bin"));
  REQUIRE(fs::exists(fs::path(out) / "timestamps.bin"));
  REQUIRE(fs::exists(fs::path(out) / "truth.bin"));

  // determinism: the same config reproduces every artifact bit for bit
  const std::string sketch_bytes = slurp(fs::path(out) / "sketch.bin");
  const std::string ts_bytes = slurp(fs::path(out) / "timestamps.bin");
  const RunResult again = run("acquire --config " + config.string() + " --out " + out);
  REQUIRE(again.exit_code == 0);
  CHECK(slurp(fs::path(out) / "sketch.bin") == sketch_bytes);
  CHECK(slurp(fs::path(out) / "timestamps.bin") == ts_bytes);

  const RunResult rec = run("reconstruct " + (fs::path(out) / "sketch.bin").string() +
                            " --config " + config.string() + " --out " + out +
                            " --timestamps " + (fs::path(out) / "timestamps.bin").string() +
                            " --truth " + (fs::path(out) / "truth.bin").string());
  REQUIRE_MESSAGE(rec.exit_code == 0, rec.output);
  CHECK(rec.output.find("depth vs truth") != std::string::npos);
  CHECK(rec.output.find("online-vs-offline sketch |diff|") != std::string::npos);
  REQUIRE(fs::exists(fs::path(out) / "depth.bin"));
  REQUIRE(fs::exists(fs::path(out) / "depth_flp.bin"));
  REQUIRE(fs::exists(fs::path(out) / "error_map.bin"));
  REQUIRE(fs::exists(fs::path(out) / "report.csv"));

  // the reconstruction lands near the two scene depths
  const DepthMap depth = read_depth_map_file(fs::path(out) / "depth.bin");
  const DepthMap truth = read_depth_map_file(fs::path(out) / "truth.bin");
  size_t close = 0;
  for (size_t p = 0; p < depth.tof_bins.size(); ++p) {
    if (std::isnan(depth.tof_bins[p])) continue;
    if (std::abs(circular_error_bins(depth.tof_bins[p], truth.tof_bins[p])) < 25.0) ++close;
  }
  CHECK(close > depth.tof_bins.size() * 9 / 10);

  // the cmm reference path also works
  const RunResult cmm = run("reconstruct " + (fs::path(out) / "sketch.bin").string() +
                            " --config " + config.string() + " --out " + out +
                            " --timestamps " + (fs::path(out) / "timestamps.bin").string() +
                            " --ref-cmm");
  REQUIRE_MESSAGE(cmm.exit_code == 0, cmm.output);
  CHECK(cmm.output.find("depth vs cmm") != std::string::npos);
  CHECK(fs::exists(fs::path(out) / "depth_cmm.bin"));
}

TEST_CASE("reconstruct rejects malformed files with exit code 3") {
  TempDir dir;
  const fs::path config = write_small_config(dir);
  const std::string out = (dir.path / "run").string();
  REQUIRE(run("acquire --config " + config.string() + " --out " + out).exit_code == 0);

  const fs::path sketch = fs::path(out) / "sketch.bin";
  const std::string bytes = slurp(sketch);

  // truncated
  std::ofstream(sketch, std::ios::binary | std::ios::trunc)
      .write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  CHECK(run("reconstruct " + sketch.string() + " --out " + out).exit_code == 3);

  // bad magic
  std::string mangled = bytes;
  mangled[0] = 'Z';
  std::ofstream(sketch, std::ios::binary | std::ios::trunc)
      .write(mangled.data(), static_cast<std::streamsize>(mangled.size()));
  CHECK(run("reconstruct " + sketch.string() + " --out " + out).exit_code == 3);

  // missing
  CHECK(run("reconstruct " + (fs::path(out) / "nope.bin").string() + " --out " + out)
            .exit_code == 3);
}

TEST_CASE("config errors exit with code 2") {
  TempDir dir;
  const std::string out = (dir.path / "x").string();

  // unknown key
  const fs::path bad1 = dir.path / "bad1.json";
  std::ofstream(bad1) << R"({"mode": "p1", "warp_factor": 9})";
  CHECK(run("acquire --config " + bad1.string() + " --out " + out).exit_code == 2);

  // fmax over the format budget
  const fs::path bad2 = dir.path / "bad2.json";
  std::ofstream(bad2) << R"({"rows": 4, "cols": 4, "fmax": 513})";
  CHECK(run("acquire --config " + bad2.string() + " --out " + out).exit_code == 2);

  // malformed JSON
  const fs::path bad3 = dir.path / "bad3.json";
  std::ofstream(bad3) << "{not json";
  CHECK(run("acquire --config " + bad3.string() + " --out " + out).exit_code == 2);

  // nonexistent config file is a usage error from the parser
  CHECK(run("acquire --config " + (dir.path / "missing.json").string()).exit_code == 2);
}

TEST_CASE("sweep over lut depth writes one csv row per point, non-increasing vs flp") {
  TempDir dir;
  const fs::path config = write_small_config(dir);
  const std::string out = (dir.path / "sweep").string();

  const RunResult res =
      run("sweep --axis lut_depth --config " + config.string() + " --out " + out);
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  const fs::path csv_path = fs::path(out) / "sweep_lut_depth.csv";
  REQUIRE(fs::exists(csv_path));

  const std::string csv = slurp(csv_path);
  size_t rows = 0;
  double previous = 1e300;
  size_t pos = csv.find('\n') + 1;  // skip header
  while (pos < csv.size()) {
    const size_t end = csv.find('\n', pos);
    const std::string line = csv.substr(pos, end - pos);
    if (!line.empty()) {
      ++rows;
      // column 7 is mean_abs_vs_flp
      size_t start = 0;
      for (int c = 0; c < 6; ++c) start = line.find(',', start) + 1;
      const double vs_flp = std::stod(line.substr(start));
      CHECK(vs_flp <= previous);
      previous = vs_flp;
    }
    pos = end + 1;
  }
  CHECK(rows == 4);
}

TEST_CASE("sweep argument validation exits with code 2") {
  TempDir dir;
  const fs::path config = write_small_config(dir);
  const std::string out = (dir.path / "x").string();
  CHECK(run("sweep --axis warp --config " + config.string()).exit_code == 2);
  CHECK(run("sweep --config " + config.string()).exit_code == 2);  // axis required
  // an invalid sweep point fails validation before any work
  CHECK(run("sweep --axis lut_depth --values 33 --config " + config.string() + " --out " + out)
            .exit_code == 2);
  CHECK(run("sweep --axis detection_prob --values 1.5 --config " + config.string() +
            " --out " + out)
            .exit_code == 2);
}

TEST_SUITE_END();
