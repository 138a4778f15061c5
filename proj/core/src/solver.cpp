#include "sketchlidar/solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sketchlidar/parallel.hpp"

namespace sketchlidar {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Noiseless forward sketch of a delta at t bins.
std::array<double, kSketchSize> forward_sketch(SplineMode mode, double t) {
  std::array<double, kSketchSize> z;
  for (int i = 0; i < kSketchSize; ++i) {
    double b = std::fmod(t - i * kCellBins, static_cast<double>(kTimeBins));
    if (b < 0.0) b += kTimeBins;
    z[static_cast<size_t>(i)] = spline_basis_eval(mode, b / kCellBins);
  }
  return z;
}

}  // namespace

double wrap_bins(double t) {
  double w = std::fmod(t, static_cast<double>(kTimeBins));
  if (w < 0.0) w += kTimeBins;
  return w;
}

NormalizedSketch normalize(const std::array<int64_t, kSketchSize>& accum_raws,
                           const FxpFormat& fmt, uint32_t photon_count) {
  NormalizedSketch s;
  s.photon_count = photon_count;
  if (photon_count == 0) return s;
  for (int i = 0; i < kSketchSize; ++i) {
    s.z[static_cast<size_t>(i)] =
        std::ldexp(static_cast<double>(accum_raws[static_cast<size_t>(i)]),
                   -fmt.frac_bits()) /
        photon_count;
  }
  return s;
}

NormalizedSketch normalize(const UnpackedRecord& rec, const FxpFormat& fmt) {
  return normalize(rec.raws, fmt, rec.photon_count);
}

double estimate_background(const NormalizedSketch& s) {
  double lo = s.z[0];
  for (int i = 1; i < kSketchSize; ++i) lo = std::min(lo, s.z[static_cast<size_t>(i)]);
  return kSketchSize * std::max(lo, 0.0);
}

std::optional<double> solve_linear(const NormalizedSketch& s, double background) {
  if (!s.valid()) return std::nullopt;
  std::array<double, kSketchSize> z;
  bool any = false;
  for (int i = 0; i < kSketchSize; ++i) {
    z[static_cast<size_t>(i)] =
        std::max(s.z[static_cast<size_t>(i)] - background / kSketchSize, 0.0);
    any = any || z[static_cast<size_t>(i)] > 0.0;
  }
  if (!any) return std::nullopt;
  int best = 0;
  double best_sum = -1.0;
  for (int j = 0; j < kSketchSize; ++j) {
    const double sum = z[static_cast<size_t>(j)] + z[static_cast<size_t>((j + 1) % kSketchSize)];
    if (sum > best_sum) {  // strict: ties keep the smallest index
      best_sum = sum;
      best = j;
    }
  }
  const double frac = z[static_cast<size_t>((best + 1) % kSketchSize)] / best_sum;
  return wrap_bins(kCellBins * (best + 1 + frac));
}

std::optional<double> solve_fourier(const NormalizedSketch& s) {
  if (!s.valid()) return std::nullopt;
  const double c = (s.z[0] - s.z[2]) / 2.0;
  const double sn = (s.z[1] - s.z[3]) / 2.0;
  if (c == 0.0 && sn == 0.0) return std::nullopt;
  return wrap_bins(kTimeBins / (2.0 * std::numbers::pi) * std::atan2(sn, c));
}

GridSolver::GridSolver(SplineMode mode, double step_bins) : mode_(mode), step_(step_bins) {
  if (!(step_bins > 0.0) || step_bins > kCellBins) {
    throw ConfigError("grid solver: invalid step");
  }
  const size_t n = static_cast<size_t>(std::llround(kTimeBins / step_bins));
  table_.resize(n);
  self_dot_.resize(n);
  for (size_t k = 0; k < n; ++k) {
    table_[k] = forward_sketch(mode_, static_cast<double>(k) * step_);
    double dot = 0.0;
    for (double v : table_[k]) dot += v * v;
    self_dot_[k] = dot;
  }
}

std::optional<double> GridSolver::solve(const NormalizedSketch& s, double background) const {
  if (!s.valid()) return std::nullopt;
  std::array<double, kSketchSize> z = s.z;
  if (mode_.kind() == SplineKind::polynomial) {
    // Remove the modelled uniform floor and rescale so the match is against
    // the unit-mass forward sketch.
    if (background >= 1.0) return std::nullopt;
    for (double& v : z) v = (v - background / kSketchSize) / (1.0 - background);
  }
  size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < table_.size(); ++k) {
    double dot = 0.0;
    for (int i = 0; i < kSketchSize; ++i) {
      dot += z[static_cast<size_t>(i)] * table_[k][static_cast<size_t>(i)];
    }
    const double cost = self_dot_[k] - 2.0 * dot;
    if (cost < best_cost) {  // strict: ties keep the smallest position
      best_cost = cost;
      best = k;
    }
  }
  return static_cast<double>(best) * step_;
}

std::optional<double> solve_grid(const NormalizedSketch& s, SplineMode mode,
                                 double background) {
  return GridSolver(mode).solve(s, background);
}

DepthMap DepthMap::invalid(int rows, int cols) {
  DepthMap map;
  map.rows = rows;
  map.cols = cols;
  map.tof_bins.assign(static_cast<size_t>(rows) * cols, kNan);
  return map;
}

bool DepthMap::is_valid(int row, int col) const { return !std::isnan(at(row, col)); }

size_t DepthMap::valid_count() const {
  size_t n = 0;
  for (double v : tof_bins) n += !std::isnan(v);
  return n;
}

DepthMap depth_map_from_sketches(std::span<const NormalizedSketch> sketches, int rows,
                                 int cols, SplineMode mode,
                                 std::optional<double> background, double offset_bins,
                                 int threads) {
  if (rows <= 0 || cols <= 0 ||
      sketches.size() != static_cast<size_t>(rows) * cols) {
    throw std::invalid_argument("depth map: sketch count does not match dimensions");
  }
  DepthMap map = DepthMap::invalid(rows, cols);
  const bool use_grid = mode.kind() == SplineKind::polynomial && mode.degree() == 2;
  std::optional<GridSolver> grid;
  if (use_grid) grid.emplace(mode);

  parallel_for(0, static_cast<int64_t>(sketches.size()), threads, [&](int64_t lo, int64_t hi) {
    for (int64_t p = lo; p < hi; ++p) {
      const NormalizedSketch& s = sketches[static_cast<size_t>(p)];
      if (!s.valid()) continue;
      std::optional<double> est;
      if (mode.kind() == SplineKind::fourier) {
        est = solve_fourier(s);
      } else {
        const double bg = background.value_or(estimate_background(s));
        est = use_grid ? grid->solve(s, bg) : solve_linear(s, bg);
      }
      if (est) map.tof_bins[static_cast<size_t>(p)] = wrap_bins(*est + offset_bins);
    }
  });
  return map;
}

DepthMap build_depth_map(std::span<const PackedSketchRecord> records, int rows, int cols,
                         const ReconstructOptions& opts) {
  if (rows <= 0 || cols <= 0 ||
      records.size() != static_cast<size_t>(rows) * cols) {
    throw std::invalid_argument("depth map: record count does not match dimensions");
  }
  std::vector<NormalizedSketch> sketches(records.size());
  for (size_t p = 0; p < records.size(); ++p) {
    sketches[p] = normalize(unpack_record(records[p], opts.format), opts.format);
    sketches[p].row = static_cast<int>(p) / cols;
    sketches[p].col = static_cast<int>(p) % cols;
  }
  return depth_map_from_sketches(sketches, rows, cols, opts.mode, opts.background,
                                 opts.offset_bins, opts.threads);
}

}  // namespace sketchlidar
