#include "sketchlidar/reference.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sketchlidar/parallel.hpp"

namespace sketchlidar {

namespace {

std::array<double, kSketchSize> basis_at_code(SplineMode mode, int code) {
  std::array<double, kSketchSize> phi;
  for (int i = 0; i < kSketchSize; ++i) {
    const int b = modulo_unit(code, i);
    phi[static_cast<size_t>(i)] =
        spline_basis_eval(mode, static_cast<double>(b) / kCellBins);
  }
  return phi;
}

}  // namespace

uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

Histogram histogram_build(std::span<const SpadTimestamp> stream) {
  Histogram h;
  for (SpadTimestamp ts : stream) h.add(ts);
  return h;
}

NormalizedSketch flp_sketch(std::span<const SpadTimestamp> photons, SplineMode mode) {
  NormalizedSketch s;
  std::array<double, kSketchSize> acc{};
  uint32_t n = 0;
  for (SpadTimestamp ts : photons) {
    if (!ts.has_photon()) continue;
    const auto phi = basis_at_code(mode, ts.code);
    for (int i = 0; i < kSketchSize; ++i) acc[static_cast<size_t>(i)] += phi[static_cast<size_t>(i)];
    ++n;
  }
  s.photon_count = n;
  if (n > 0) {
    for (int i = 0; i < kSketchSize; ++i) s.z[static_cast<size_t>(i)] = acc[static_cast<size_t>(i)] / n;
  }
  return s;
}

NormalizedSketch sketch_from_histogram(const Histogram& h, SplineMode mode) {
  NormalizedSketch s;
  std::array<double, kSketchSize> acc{};
  uint64_t n = 0;
  for (int code = 1; code < kTimeBins; ++code) {
    const uint32_t c = h.counts[static_cast<size_t>(code)];
    if (c == 0) continue;
    const auto phi = basis_at_code(mode, code);
    for (int i = 0; i < kSketchSize; ++i) {
      acc[static_cast<size_t>(i)] += static_cast<double>(c) * phi[static_cast<size_t>(i)];
    }
    n += c;
  }
  s.photon_count = static_cast<uint32_t>(n);
  if (n > 0) {
    for (int i = 0; i < kSketchSize; ++i) {
      s.z[static_cast<size_t>(i)] = acc[static_cast<size_t>(i)] / static_cast<double>(n);
    }
  }
  return s;
}

std::optional<double> local_cmm(const Histogram& h, int window_bins) {
  if (window_bins < 0 || window_bins >= kTimeBins / 2) {
    throw std::invalid_argument("local_cmm: window outside [0, T/2)");
  }
  int peak = -1;
  uint32_t peak_count = 0;
  for (int x = 0; x < kTimeBins; ++x) {
    if (h.counts[static_cast<size_t>(x)] > peak_count) {  // strict: smallest bin wins ties
      peak_count = h.counts[static_cast<size_t>(x)];
      peak = x;
    }
  }
  if (peak < 0) return std::nullopt;
  double num = 0.0, den = 0.0;
  for (int d = -window_bins; d <= window_bins; ++d) {
    const int x = ((peak + d) % kTimeBins + kTimeBins) % kTimeBins;
    const double c = h.counts[static_cast<size_t>(x)];
    num += (peak + d) * c;  // unwrapped coordinate, wrapped back at the end
    den += c;
  }
  return wrap_bins(num / den);
}

CompressionRatios compression_ratio(const SketchConfig& cfg) {
  CompressionRatios r;
  r.frame_ratio = static_cast<double>(cfg.fmax);
  r.byte_ratio = static_cast<double>(cfg.fmax) * 2.0 / 12.0;
  return r;
}

double circular_error_bins(double est, double ref) {
  double e = std::fmod(est - ref, static_cast<double>(kTimeBins));
  if (e > kTimeBins / 2.0) e -= kTimeBins;
  if (e <= -kTimeBins / 2.0) e += kTimeBins;
  return e;
}

ErrorReport evaluate(const DepthMap& est, const DepthMap& ref) {
  if (est.rows != ref.rows || est.cols != ref.cols) {
    throw std::invalid_argument("evaluate: depth map dimensions differ");
  }
  ErrorReport report;
  report.error_map = DepthMap::invalid(est.rows, est.cols);
  double sum_abs = 0.0, sum_sq = 0.0, sum_log = 0.0;
  for (size_t p = 0; p < est.tof_bins.size(); ++p) {
    const double a = est.tof_bins[p];
    const double b = ref.tof_bins[p];
    if (std::isnan(a) || std::isnan(b)) continue;
    const double e = circular_error_bins(a, b);
    report.error_map.tof_bins[p] = e;
    sum_abs += std::abs(e);
    sum_sq += e * e;
    sum_log += std::log10(std::abs(e) + 1.0);
    ++report.valid_pixels;
  }
  if (report.valid_pixels > 0) {
    const double n = static_cast<double>(report.valid_pixels);
    report.mean_abs_error = sum_abs / n;
    report.rmse = std::sqrt(sum_sq / n);
    report.mean_log_error = sum_log / n;
  }
  return report;
}

std::vector<NormalizedSketch> flp_sketch_map(std::span<const SpadTimestamp> frames,
                                             int rows, int cols, int n_frames,
                                             SplineMode mode, int threads) {
  const size_t pixels = static_cast<size_t>(rows) * cols;
  if (frames.size() != pixels * static_cast<size_t>(n_frames)) {
    throw std::invalid_argument("flp_sketch_map: frame block size mismatch");
  }
  std::vector<NormalizedSketch> out(pixels);
  parallel_for(0, static_cast<int64_t>(pixels), threads, [&](int64_t lo, int64_t hi) {
    std::vector<SpadTimestamp> codes;
    codes.reserve(static_cast<size_t>(n_frames));
    for (int64_t p = lo; p < hi; ++p) {
      codes.clear();
      for (int f = 0; f < n_frames; ++f) {
        codes.push_back(frames[static_cast<size_t>(f) * pixels + static_cast<size_t>(p)]);
      }
      out[static_cast<size_t>(p)] = flp_sketch(codes, mode);
      out[static_cast<size_t>(p)].row = static_cast<int>(p) / cols;
      out[static_cast<size_t>(p)].col = static_cast<int>(p) % cols;
    }
  });
  return out;
}

DepthMap cmm_depth_map(std::span<const SpadTimestamp> frames, int rows, int cols,
                       int n_frames, int window_bins, int threads) {
  const size_t pixels = static_cast<size_t>(rows) * cols;
  if (frames.size() != pixels * static_cast<size_t>(n_frames)) {
    throw std::invalid_argument("cmm_depth_map: frame block size mismatch");
  }
  DepthMap map = DepthMap::invalid(rows, cols);
  parallel_for(0, static_cast<int64_t>(pixels), threads, [&](int64_t lo, int64_t hi) {
    for (int64_t p = lo; p < hi; ++p) {
      Histogram h;
      for (int f = 0; f < n_frames; ++f) {
        h.add(frames[static_cast<size_t>(f) * pixels + static_cast<size_t>(p)]);
      }
      const auto est = local_cmm(h, window_bins);
      if (est) map.tof_bins[static_cast<size_t>(p)] = *est;
    }
  });
  return map;
}

DepthMap sketch_difference_map(std::span<const NormalizedSketch> a,
                               std::span<const NormalizedSketch> b, int rows, int cols) {
  const size_t pixels = static_cast<size_t>(rows) * cols;
  if (a.size() != pixels || b.size() != pixels) {
    throw std::invalid_argument("sketch_difference_map: size mismatch");
  }
  DepthMap map = DepthMap::invalid(rows, cols);
  for (size_t p = 0; p < pixels; ++p) {
    if (!a[p].valid() || !b[p].valid()) continue;
    double worst = 0.0;
    for (int i = 0; i < kSketchSize; ++i) {
      worst = std::max(worst, std::abs(a[p].z[static_cast<size_t>(i)] -
                                       b[p].z[static_cast<size_t>(i)]));
    }
    map.tof_bins[p] = worst;
  }
  return map;
}

}  // namespace sketchlidar
