#pragma once

// Phase-shifting coefficient recovery, spectrum assembly and image recovery.
//
// With P_phi = a + b cos(theta + phi), theta = 2 pi (u x + v y) / n, an ideal
// detector reads D_phi = sum R (a + b cos(theta + phi)). Then
//   2 D_0 - D_1 - D_2         =  3b sum R cos(theta)
//   sqrt(3) (D_1 - D_2)       = -3b sum R sin(theta)
// so the three-step combination is 3b times the forward DFT coefficient and
// the mean level a cancels. The four-step combination gives 2b times it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fsi/fft.hpp"
#include "fsi/grid.hpp"
#include "fsi/sampling.hpp"
#include "fsi/sensor.hpp"

namespace fsi {

/// Phases 0, 2pi/3, 4pi/3.
inline Complex coefficient_three_step(double d0, double d1, double d2) {
  return {2.0 * d0 - d1 - d2, std::numbers::sqrt3 * (d1 - d2)};
}

/// Phases 0, pi/2, pi, 3pi/2.
inline Complex coefficient_four_step(double d0, double d1, double d2, double d3) { return {d0 - d2, d1 - d3}; }

inline Complex recover_coefficient(PhaseSchedule schedule, std::span<const double> d) {
  if (schedule == PhaseSchedule::three_step) {
    detail::require(d.size() == 3, ErrorKind::invalid_argument, "three-step recovery needs 3 readings");
    return coefficient_three_step(d[0], d[1], d[2]);
  }
  detail::require(d.size() == 4, ErrorKind::invalid_argument, "four-step recovery needs 4 readings");
  return coefficient_four_step(d[0], d[1], d[2], d[3]);
}

/// Divisor turning a recovered combination into an unnormalized DFT coefficient
/// of the block-averaged scene: (3b or 2b) * gain * k^2.
inline double normalization(const SamplingPlan& plan, double gain) {
  const double per = plan.schedule == PhaseSchedule::three_step ? 3.0 : 2.0;
  const double k = plan.pattern.upsample;
  return per * plan.pattern.contrast * gain * k * k;
}

/// n x n spectrum indexed by (u mod n, v mod n).
struct Spectrum {
  int size = 0;
  Grid<Complex> coefficients;
  Grid<std::uint8_t> mask;

  explicit Spectrum(int n = 0) : size(n), coefficients(n, n), mask(n, n) {}

  Complex& at(FrequencySample f) { return coefficients(wrap(f.u), wrap(f.v)); }
  const Complex& at(FrequencySample f) const { return coefficients(wrap(f.u), wrap(f.v)); }
  bool acquired(FrequencySample f) const { return mask(wrap(f.u), wrap(f.v)) != 0; }

  /// Sets (u, v) and its conjugate mirror; self-conjugate bins keep only the real part.
  void set(FrequencySample f, Complex c) {
    const auto mirror = conjugate(f, size);
    if (mirror == f) c = {c.real(), 0.0};
    at(f) = c;
    at(mirror) = std::conj(c);
    mask(wrap(f.u), wrap(f.v)) = 1;
    mask(wrap(mirror.u), wrap(mirror.v)) = 1;
  }

  /// Copy with every bin outside `keep` zeroed and unmasked.
  Spectrum truncated(std::span<const FrequencySample> keep) const {
    Spectrum out(size);
    for (const auto& f : keep) out.set(f, at(f));
    return out;
  }

 private:
  int wrap(int f) const { return ((f % size) + size) % size; }
};

/// Real-valued reconstruction, unbounded before export.
struct ReconstructedImage {
  Grid<double> values;
  std::string provenance;
  int width() const noexcept { return values.width(); }
  int height() const noexcept { return values.height(); }
};

inline Spectrum assemble_spectrum(std::span<const MeasurementRecord> records, const SamplingPlan& plan,
                                  double gain = 1.0) {
  const int n = plan.image_size;
  const std::size_t per = plan.phases_per_frequency();
  detail::require(gain != 0.0, ErrorKind::invalid_argument, "detector gain must be non-zero");
  detail::require(plan.steps.size() % per == 0, ErrorKind::consistency,
                  "plan step count is not a multiple of the phase schedule");

  const auto freqs = plan.frequencies();
  {
    auto sorted = freqs;
    std::sort(sorted.begin(), sorted.end());
    detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::consistency,
                    "plan lists a frequency more than once");
  }

  std::vector<double> readings(plan.steps.size(), 0.0);
  std::vector<std::uint8_t> seen(plan.steps.size(), 0);
  for (const auto& r : records) {
    detail::require(r.step_index < plan.steps.size(), ErrorKind::consistency,
                    "measurement step " + std::to_string(r.step_index) + " is not in the plan");
    const auto& step = plan.steps[r.step_index];
    detail::require(step.frequency == r.frequency && std::abs(step.phase - r.phase) <= 1e-12, ErrorKind::consistency,
                    "measurement step " + std::to_string(r.step_index) + " does not match the plan's frequency/phase");
    detail::require(!seen[r.step_index], ErrorKind::consistency,
                    "duplicate measurement for step " + std::to_string(r.step_index));
    seen[r.step_index] = 1;
    readings[r.step_index] = r.value;
  }

  const double norm = normalization(plan, gain);
  Spectrum spectrum(n);
  for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
    for (std::size_t p = 0; p < per; ++p) {
      const auto& step = plan.steps[fi * per + p];
      detail::require(seen[fi * per + p], ErrorKind::consistency,
                      "missing phase " + std::to_string(step.phase) + " for frequency (" +
                          std::to_string(step.frequency.u) + "," + std::to_string(step.frequency.v) + ")");
    }
    const std::span<const double> group(readings.data() + fi * per, per);
    spectrum.set(freqs[fi], recover_coefficient(plan.schedule, group) / norm);
  }
  return spectrum;
}

/// Inverse DFT with 1 / n^2 normalization; the (numerically zero) imaginary part is dropped.
inline ReconstructedImage inverse_transform(const Spectrum& s, std::string provenance = {}) {
  const int n = s.size;
  double peak = 0.0;
  for (const auto& c : s.coefficients.values()) peak = std::max(peak, std::abs(c));
  const double tol = 1e-9 * std::max(peak, std::numeric_limits<double>::min());
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      const Complex c = s.coefficients(u, v);
      const Complex m = s.coefficients((n - u) % n, (n - v) % n);
      detail::require(std::abs(c - std::conj(m)) <= tol, ErrorKind::consistency,
                      "spectrum is not conjugate-symmetric at bin (" + std::to_string(u) + "," + std::to_string(v) +
                          ")");
    }
  }

  const auto full = idft2(s.coefficients);
  ReconstructedImage out{Grid<double>(n, n), std::move(provenance)};
  double max_real = 0.0;
  double max_imag = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    out.values.values()[i] = full.values()[i].real();
    max_real = std::max(max_real, std::abs(full.values()[i].real()));
    max_imag = std::max(max_imag, std::abs(full.values()[i].imag()));
  }
  detail::require(max_imag <= 1e-9 * std::max(max_real, std::numeric_limits<double>::min()) || max_imag == 0.0,
                  ErrorKind::consistency, "inverse transform left a non-negligible imaginary residue");
  return out;
}

struct QualityReport {
  double rmse = 0.0;
  double psnr_db = std::numeric_limits<double>::infinity();  ///< +inf when rmse == 0
  double peak = 1.0;
  bool psnr_infinite() const noexcept { return std::isinf(psnr_db); }
};

inline QualityReport quality_metrics(const Grid<double>& image, const Grid<double>& reference, double peak = 1.0) {
  detail::require(image.same_shape(reference), ErrorKind::dimension_mismatch,
                  "image and reference differ in size");
  detail::require(!image.empty(), ErrorKind::invalid_argument, "cannot score an empty image");
  double sum = 0.0;
  const auto a = image.values();
  const auto b = reference.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  QualityReport q;
  q.peak = peak;
  q.rmse = std::sqrt(sum / static_cast<double>(a.size()));
  q.psnr_db = q.rmse == 0.0 ? std::numeric_limits<double>::infinity() : 20.0 * std::log10(peak / q.rmse);
  return q;
}

/// Measurements -> spectrum -> image.
inline ReconstructedImage reconstruct(std::span<const MeasurementRecord> records, const SamplingPlan& plan,
                                      double gain = 1.0, std::string provenance = {}) {
  return inverse_transform(assemble_spectrum(records, plan, gain), std::move(provenance));
}

}  // namespace fsi
