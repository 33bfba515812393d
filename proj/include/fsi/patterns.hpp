#pragma once

// Fourier basis illumination patterns: grayscale synthesis, upsampling and
// error-diffusion binarization.
//
// Coordinates: a logical N x N pattern is sampled at pixel centres 0..N-1.
// After upsampling by k, fine pixel X covers the logical interval around
// x = (X + 0.5) / k - 0.5, so every k x k block is centred on the logical pixel
// it replaces. At k = 1 the fine and logical grids coincide.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fsi/grid.hpp"

namespace fsi {

enum class UpsampleMode {
  bicubic,   ///< synthesize N x N, then cubic-convolution interpolation to kN x kN
  analytic,  ///< evaluate the sinusoid directly on the kN x kN grid
};

enum class ScanOrder { raster, serpentine };

inline std::string to_string(UpsampleMode mode) {
  return mode == UpsampleMode::bicubic ? "bicubic" : "analytic";
}

inline UpsampleMode parse_upsample_mode(std::string_view text) {
  if (text == "bicubic") return UpsampleMode::bicubic;
  if (text == "analytic") return UpsampleMode::analytic;
  throw Error(ErrorKind::invalid_argument, "unknown upsample mode '" + std::string(text) + "'");
}

inline std::string to_string(ScanOrder order) {
  return order == ScanOrder::raster ? "raster" : "serpentine";
}

inline ScanOrder parse_scan_order(std::string_view text) {
  if (text == "raster") return ScanOrder::raster;
  if (text == "serpentine") return ScanOrder::serpentine;
  throw Error(ErrorKind::invalid_argument, "unknown scan order '" + std::string(text) + "'");
}

/// One sinusoidal pattern P(x, y) = mean + contrast * cos(2*pi*(u*x + v*y)/N + phase).
struct PatternSpec {
  int u = 0;
  int v = 0;
  double phase = 0.0;
  double mean = 0.5;
  double contrast = 0.5;
  int base_size = 1;
  int upsample = 1;

  void validate() const {
    constexpr double slack = 1e-12;
    detail::require(base_size >= 1, ErrorKind::invalid_argument, "pattern base size must be >= 1");
    detail::require(upsample >= 1, ErrorKind::invalid_argument, "upsample factor must be >= 1");
    detail::require(mean > 0.0 && mean < 1.0, ErrorKind::invalid_argument, "pattern mean must lie in (0, 1)");
    detail::require(contrast > 0.0, ErrorKind::invalid_argument, "pattern contrast must be positive");
    detail::require(mean - contrast >= -slack && mean + contrast <= 1.0 + slack, ErrorKind::invalid_argument,
                    "mean +/- contrast must stay inside [0, 1]");
    detail::require(2 * std::abs(u) <= base_size && 2 * std::abs(v) <= base_size, ErrorKind::invalid_argument,
                    "frequency (" + std::to_string(u) + "," + std::to_string(v) + ") exceeds Nyquist for N=" +
                        std::to_string(base_size));
  }
};

/// Grayscale pattern evaluated directly on the (kN) x (kN) grid.
inline GrayPattern fourier_pattern(const PatternSpec& spec) {
  spec.validate();
  const int k = spec.upsample;
  const int size = spec.base_size * k;
  const double step_u = 2.0 * std::numbers::pi * spec.u / spec.base_size;
  const double step_v = 2.0 * std::numbers::pi * spec.v / spec.base_size;
  auto logical = [k](int fine) { return (fine + 0.5) / k - 0.5; };

  GrayPattern out(size, size);
  for (int y = 0; y < size; ++y) {
    const double row_phase = step_v * logical(y) + spec.phase;
    for (int x = 0; x < size; ++x) {
      const double value = spec.mean + spec.contrast * std::cos(step_u * logical(x) + row_phase);
      out(x, y) = std::clamp(value, 0.0, 1.0);
    }
  }
  return out;
}

namespace detail {

// Cubic convolution kernel with a = -0.5.
inline double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

inline int wrap_index(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

// Taps and weights for resampling a length-n periodic signal by factor k.
struct CubicTaps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

inline std::vector<CubicTaps> cubic_taps(int n, int k) {
  std::vector<CubicTaps> taps(static_cast<std::size_t>(n) * k);
  for (int fine = 0; fine < n * k; ++fine) {
    const double src = (fine + 0.5) / k - 0.5;
    const int base = static_cast<int>(std::floor(src));
    const double frac = src - base;
    auto& t = taps[static_cast<std::size_t>(fine)];
    for (int j = 0; j < 4; ++j) {
      t.index[j] = wrap_index(base - 1 + j, n);
      t.weight[j] = cubic_weight(frac - (j - 1));
    }
  }
  return taps;
}

}  // namespace detail

/// Separable cubic-convolution upsampling by an integer factor.
///
/// The boundary wraps around: Fourier basis patterns with integer frequencies
/// are periodic over the grid, so the periodic extension is the exact
/// continuation of the signal. Results are clamped to [0, 1].
inline GrayPattern upsample_bicubic(const GrayPattern& in, int k) {
  detail::require(k >= 1, ErrorKind::invalid_argument, "upsample factor must be >= 1");
  if (k == 1 || in.empty()) return in;

  const int w = in.width();
  const int h = in.height();
  const auto taps_x = detail::cubic_taps(w, k);
  const auto taps_y = detail::cubic_taps(h, k);

  Grid<double> rows(w * k, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w * k; ++x) {
      const auto& t = taps_x[static_cast<std::size_t>(x)];
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) sum += t.weight[j] * in(t.index[j], y);
      rows(x, y) = sum;
    }
  }

  GrayPattern out(w * k, h * k);
  for (int y = 0; y < h * k; ++y) {
    const auto& t = taps_y[static_cast<std::size_t>(y)];
    for (int x = 0; x < w * k; ++x) {
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) sum += t.weight[j] * rows(x, t.index[j]);
      out(x, y) = std::clamp(sum, 0.0, 1.0);
    }
  }
  return out;
}

/// Floyd-Steinberg error diffusion with threshold 0.5 (ties quantize to 1).
///
/// Kernel 7/16 right, 3/16 below-left, 5/16 below, 1/16 below-right, mirrored on
/// right-to-left rows in serpentine order. Error pushed outside the grid is lost.
inline BinaryPattern dither_floyd_steinberg(const GrayPattern& in, ScanOrder order = ScanOrder::raster) {
  const int w = in.width();
  const int h = in.height();
  BinaryPattern out(w, h);
  if (in.empty()) return out;

  std::vector<double> current(static_cast<std::size_t>(w) + 2, 0.0);
  std::vector<double> next(static_cast<std::size_t>(w) + 2, 0.0);
  // Buffers carry one guard cell on each side; index x maps to slot x + 1.
  for (int y = 0; y < h; ++y) {
    std::fill(next.begin(), next.end(), 0.0);
    const bool reverse = order == ScanOrder::serpentine && (y % 2 == 1);
    const int dir = reverse ? -1 : 1;
    for (int i = 0; i < w; ++i) {
      const int x = reverse ? w - 1 - i : i;
      const std::size_t slot = static_cast<std::size_t>(x) + 1;
      const double value = in(x, y) + current[slot];
      const std::uint8_t bit = value >= 0.5 ? 1 : 0;
      out(x, y) = bit;
      const double err = value - bit;
      current[slot + dir] += err * (7.0 / 16.0);
      next[slot - dir] += err * (3.0 / 16.0);
      next[slot] += err * (5.0 / 16.0);
      next[slot + dir] += err * (1.0 / 16.0);
    }
    std::swap(current, next);
  }
  return out;
}

/// Binary Fourier pattern: grayscale synthesis, upsampling per `mode`, then dithering.
inline BinaryPattern binary_fourier_pattern(const PatternSpec& spec, UpsampleMode mode = UpsampleMode::bicubic,
                                            ScanOrder order = ScanOrder::raster) {
  spec.validate();
  if (mode == UpsampleMode::analytic) return dither_floyd_steinberg(fourier_pattern(spec), order);
  PatternSpec base = spec;
  base.upsample = 1;
  return dither_floyd_steinberg(upsample_bicubic(fourier_pattern(base), spec.upsample), order);
}

}  // namespace fsi
