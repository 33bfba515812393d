#pragma once

// Which Fourier coefficients to acquire, in what order, and how long it takes.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fsi/grid.hpp"
#include "fsi/patterns.hpp"

namespace fsi {

/// Signed spatial frequency (u, v) of one coefficient of an N x N image,
/// with u, v in [-N/2, N/2 - 1].
struct FrequencySample {
  int u = 0;
  int v = 0;
  friend auto operator<=>(const FrequencySample&, const FrequencySample&) = default;
};

inline int wrap_frequency(int f, int n) {
  const int half = n / 2;
  int r = ((f % n) + n) % n;
  return r >= n - half ? r - n : r;
}

/// The bin holding the complex conjugate of (u, v) for a real image.
inline FrequencySample conjugate(FrequencySample f, int n) {
  return {wrap_frequency(-f.u, n), wrap_frequency(-f.v, n)};
}

inline bool is_self_conjugate(FrequencySample f, int n) { return conjugate(f, n) == f; }

/// Membership in the canonical half-plane H(n):
///   u in [1, n/2-1], any v
///   u = 0 or u = -n/2, v in [0, n/2-1]
///   u = 0 or u = -n/2, v = -n/2
inline bool in_half_plane(FrequencySample f, int n) {
  const int half = n / 2;
  if (f.u < -half || f.u >= half || f.v < -half || f.v >= half) return false;
  if (f.u > 0) return true;
  if (f.u == 0 || f.u == -half) return f.v >= 0 || f.v == -half;
  return false;
}

namespace detail {

inline void require_even_size(int n) {
  require(n >= 2 && n % 2 == 0, ErrorKind::invalid_argument,
          "image size must be even and >= 2, got " + std::to_string(n));
}

// Angle group for ordering by atan2(v, u) ascending over (-pi, pi].
inline int angle_group(FrequencySample f) {
  if (f.v < 0) return 0;
  if (f.v == 0 && f.u < 0) return 2;
  return 1;
}

}  // namespace detail

/// Radius-then-angle total order: u^2 + v^2 ascending, ties by atan2(v, u)
/// ascending. Evaluated with integer arithmetic only.
inline bool spiral_less(FrequencySample a, FrequencySample b) {
  const long long ra = 1LL * a.u * a.u + 1LL * a.v * a.v;
  const long long rb = 1LL * b.u * b.u + 1LL * b.v * b.v;
  if (ra != rb) return ra < rb;
  const int ga = detail::angle_group(a);
  const int gb = detail::angle_group(b);
  if (ga != gb) return ga < gb;
  return 1LL * a.u * b.v - 1LL * a.v * b.u > 0;
}

/// H(n) in spiral order. Together with the conjugate mirrors it covers every
/// bin exactly once; |H(n)| = n^2/2 + 2.
inline std::vector<FrequencySample> half_plane_frequencies(int n) {
  detail::require_even_size(n);
  const int half = n / 2;
  std::vector<FrequencySample> out;
  out.reserve(static_cast<std::size_t>(n) * n / 2 + 2);
  for (int v = -half; v < half; ++v)
    for (int u = -half; u < half; ++u)
      if (in_half_plane({u, v}, n)) out.push_back({u, v});
  std::sort(out.begin(), out.end(), spiral_less);
  return out;
}

inline std::size_t half_plane_size(int n) {
  detail::require_even_size(n);
  return static_cast<std::size_t>(n) * n / 2 + 2;
}

/// The m lowest-frequency members of H(n) in spiral order.
inline std::vector<FrequencySample> spiral_path(int n, std::size_t m) {
  detail::require_even_size(n);
  detail::require(m >= 1 && m <= half_plane_size(n), ErrorKind::invalid_argument,
                  "spiral coefficient count " + std::to_string(m) + " outside [1, " +
                      std::to_string(half_plane_size(n)) + "]");
  auto all = half_plane_frequencies(n);
  all.resize(m);
  return all;
}

/// Fraction of the n x n spectrum represented by m half-plane coefficients
/// (each stands for itself and its conjugate).
inline double compression_rate(std::size_t m, int n) {
  return 2.0 * static_cast<double>(m) / (static_cast<double>(n) * n);
}

enum class PhaseSchedule { three_step, four_step };

inline std::string to_string(PhaseSchedule s) {
  return s == PhaseSchedule::three_step ? "three-step" : "four-step";
}

inline PhaseSchedule parse_phase_schedule(std::string_view text) {
  if (text == "three-step") return PhaseSchedule::three_step;
  if (text == "four-step") return PhaseSchedule::four_step;
  throw Error(ErrorKind::invalid_argument, "unknown phase schedule '" + std::string(text) + "'");
}

inline std::vector<double> schedule_phases(PhaseSchedule s) {
  using std::numbers::pi;
  if (s == PhaseSchedule::three_step) return {0.0, 2.0 * pi / 3.0, 4.0 * pi / 3.0};
  return {0.0, pi / 2.0, pi, 3.0 * pi / 2.0};
}

enum class StrategyKind { full, spiral };

struct SamplingStrategy {
  StrategyKind kind = StrategyKind::full;
  std::size_t coefficients = 0;  ///< only used by spiral

  static SamplingStrategy full() { return {StrategyKind::full, 0}; }
  static SamplingStrategy spiral(std::size_t m) { return {StrategyKind::spiral, m}; }
  friend bool operator==(const SamplingStrategy&, const SamplingStrategy&) = default;
};

inline std::string to_string(StrategyKind k) { return k == StrategyKind::full ? "full" : "spiral"; }

inline StrategyKind parse_strategy_kind(std::string_view text) {
  if (text == "full") return StrategyKind::full;
  if (text == "spiral") return StrategyKind::spiral;
  throw Error(ErrorKind::invalid_argument, "unknown sampling strategy '" + std::string(text) + "'");
}

enum class PatternKind { binary, grayscale };

inline std::string to_string(PatternKind k) { return k == PatternKind::binary ? "binary" : "grayscale"; }

inline PatternKind parse_pattern_kind(std::string_view text) {
  if (text == "binary") return PatternKind::binary;
  if (text == "grayscale") return PatternKind::grayscale;
  throw Error(ErrorKind::invalid_argument, "unknown pattern kind '" + std::string(text) + "'");
}

/// How each planned (frequency, phase) step is rendered as an illumination pattern.
struct PatternParams {
  double mean = 0.5;
  double contrast = 0.5;
  int upsample = 1;
  UpsampleMode mode = UpsampleMode::bicubic;
  PatternKind kind = PatternKind::binary;
  ScanOrder scan = ScanOrder::raster;
  friend bool operator==(const PatternParams&, const PatternParams&) = default;
};

struct PlanStep {
  FrequencySample frequency;
  double phase = 0.0;
  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

/// Ordered illumination schedule plus the parameters needed to reproduce it.
/// Steps are grouped per frequency with all scheduled phases contiguous.
struct SamplingPlan {
  int image_size = 0;
  SamplingStrategy strategy;
  PhaseSchedule schedule = PhaseSchedule::three_step;
  double rate = 1.0;  ///< illumination rate, patterns per second
  PatternParams pattern;
  std::vector<PlanStep> steps;

  std::size_t measurement_count() const noexcept { return steps.size(); }
  std::size_t phases_per_frequency() const noexcept { return schedule == PhaseSchedule::three_step ? 3 : 4; }
  std::size_t frequency_count() const noexcept { return steps.size() / phases_per_frequency(); }
  int pattern_size() const noexcept { return image_size * pattern.upsample; }

  std::vector<FrequencySample> frequencies() const {
    std::vector<FrequencySample> out;
    const std::size_t per = phases_per_frequency();
    for (std::size_t i = 0; i < steps.size(); i += per) out.push_back(steps[i].frequency);
    return out;
  }

  PatternSpec pattern_spec(const PlanStep& step) const {
    return {step.frequency.u, step.frequency.v, step.phase, pattern.mean, pattern.contrast, image_size,
            pattern.upsample};
  }

  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

inline SamplingPlan build_plan(int n, SamplingStrategy strategy, PhaseSchedule schedule, double rate,
                               PatternParams pattern = {}) {
  detail::require(rate > 0.0, ErrorKind::invalid_argument, "illumination rate must be positive");
  // Validates a, b and k once for the whole plan.
  PatternSpec{0, 0, 0.0, pattern.mean, pattern.contrast, n, pattern.upsample}.validate();

  const auto freqs = strategy.kind == StrategyKind::full ? half_plane_frequencies(n)
                                                         : spiral_path(n, strategy.coefficients);
  if (strategy.kind == StrategyKind::full) strategy.coefficients = 0;

  SamplingPlan plan{n, strategy, schedule, rate, pattern, {}};
  const auto phases = schedule_phases(schedule);
  plan.steps.reserve(freqs.size() * phases.size());
  for (const auto& f : freqs)
    for (double phase : phases) plan.steps.push_back({f, phase});
  return plan;
}

/// t_A = M / R in seconds.
inline double acquisition_time(std::size_t measurements, double rate) {
  detail::require(rate > 0.0, ErrorKind::invalid_argument, "illumination rate must be positive");
  return static_cast<double>(measurements) / rate;
}

inline double acquisition_time(const SamplingPlan& plan) {
  return acquisition_time(plan.measurement_count(), plan.rate);
}

/// The textbook 1.5 N^2 count for a full three-step plan, which ignores the
/// four self-conjugate bins that are measured once but count as a full group.
inline std::size_t idealized_measurement_count(int n) { return static_cast<std::size_t>(n) * n * 3 / 2; }

}  // namespace fsi
