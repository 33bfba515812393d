#pragma once

// Separable 2-D discrete Fourier transform on square grids.
// Forward kernel exp(-j 2 pi (u x + v y) / n); the inverse carries 1 / n^2.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "fsi/grid.hpp"

namespace fsi {

using Complex = std::complex<double>;

namespace detail {

// In-place 1-D transform of `data` with stride. sign = -1 forward, +1 inverse; unscaled.
class Dft1d {
 public:
  Dft1d(std::size_t n, int sign) : n_(n), radix2_(std::has_single_bit(n)), twiddle_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      twiddle_[i] = {std::cos(angle), std::sin(angle)};
    }
    scratch_.resize(n);
  }

  void operator()(Complex* data, std::size_t stride) {
    for (std::size_t i = 0; i < n_; ++i) scratch_[i] = data[i * stride];
    if (radix2_) {
      fft(scratch_);
    } else {
      direct(scratch_);
    }
    for (std::size_t i = 0; i < n_; ++i) data[i * stride] = scratch_[i];
  }

 private:
  void direct(std::vector<Complex>& a) {
    std::vector<Complex> out(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      Complex sum{};
      for (std::size_t x = 0; x < n_; ++x) sum += a[x] * twiddle_[(k * x) % n_];
      out[k] = sum;
    }
    a.swap(out);
  }

  // Iterative radix-2 Cooley-Tukey.
  void fft(std::vector<Complex>& a) {
    for (std::size_t i = 1, j = 0; i < n_; ++i) {
      std::size_t bit = n_ >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t step = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          const Complex t = a[i + j + len / 2] * twiddle_[j * step];
          a[i + j + len / 2] = a[i + j] - t;
          a[i + j] += t;
        }
      }
    }
  }

  std::size_t n_;
  bool radix2_;
  std::vector<Complex> twiddle_;
  std::vector<Complex> scratch_;
};

inline Grid<Complex> transform_2d(Grid<Complex> g, int sign) {
  detail::require(g.width() == g.height(), ErrorKind::dimension_mismatch, "transform needs a square grid");
  const auto n = static_cast<std::size_t>(g.width());
  if (n == 0) return g;
  Dft1d dft(n, sign);
  Complex* base = g.values().data();
  for (std::size_t row = 0; row < n; ++row) dft(base + row * n, 1);
  for (std::size_t col = 0; col < n; ++col) dft(base + col, n);
  return g;
}

}  // namespace detail

/// Forward transform indexed by (u mod n, v mod n).
template <class T>
Grid<Complex> dft2(const Grid<T>& image) {
  Grid<Complex> g(image.width(), image.height());
  for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] = static_cast<double>(image.values()[i]);
  return detail::transform_2d(std::move(g), -1);
}

/// Inverse transform including the 1 / n^2 factor.
inline Grid<Complex> idft2(Grid<Complex> spectrum) {
  const double scale = 1.0 / static_cast<double>(spectrum.size());
  auto out = detail::transform_2d(std::move(spectrum), +1);
  for (auto& c : out.values()) c *= scale;
  return out;
}

}  // namespace fsi
