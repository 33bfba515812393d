#pragma once

// Single-pixel detector chain: pattern/scene inner product, gain and dark
// offset, single-pole temporal response, DAQ sampling, additive noise and
// per-pattern averaging.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsi/grid.hpp"
#include "fsi/patterns.hpp"
#include "fsi/random.hpp"
#include "fsi/sampling.hpp"

namespace fsi {

enum class Channel { mono, red, green, blue };

inline std::string to_string(Channel c) {
  switch (c) {
    case Channel::mono: return "mono";
    case Channel::red: return "red";
    case Channel::green: return "green";
    case Channel::blue: return "blue";
  }
  return "mono";
}

/// Object reflectance, one value in [0, 1] per illuminated pixel.
struct Scene {
  Grid<double> reflectance;
  Channel channel = Channel::mono;

  int width() const noexcept { return reflectance.width(); }
  int height() const noexcept { return reflectance.height(); }

  void validate() const {
    for (double r : reflectance.values())
      detail::require(r >= 0.0 && r <= 1.0, ErrorKind::invalid_argument, "scene reflectance must lie in [0, 1]");
  }
};

struct DetectorConfig {
  double gain = 1.0;               ///< output units per unit flux
  double dark_offset = 0.0;        ///< output units
  double noise_sigma = 0.0;        ///< std-dev per DAQ sample, output units
  double rise_time = 0.0;          ///< 10-90 % rise time, seconds
  double daq_rate = 500'000.0;     ///< samples per second
  double illumination_rate = 1.0;  ///< patterns per second
  double settle_discard = 0.0;     ///< leading fraction of each pattern's samples left out of the mean

  void validate() const {
    detail::require(daq_rate > 0.0 && illumination_rate > 0.0, ErrorKind::invalid_argument,
                    "DAQ and illumination rates must be positive");
    detail::require(daq_rate >= illumination_rate, ErrorKind::invalid_argument,
                    "illumination rate exceeds the DAQ rate: fewer than one sample per pattern");
    detail::require(settle_discard >= 0.0 && settle_discard < 1.0, ErrorKind::invalid_argument,
                    "settle_discard must lie in [0, 1)");
    detail::require(rise_time >= 0.0, ErrorKind::invalid_argument, "rise time must be non-negative");
    detail::require(noise_sigma >= 0.0, ErrorKind::invalid_argument, "noise sigma must be non-negative");
  }

  /// n_s = floor(daq_rate / illumination_rate).
  std::size_t samples_per_pattern() const {
    detail::require(daq_rate > 0.0 && illumination_rate > 0.0, ErrorKind::invalid_argument,
                    "DAQ and illumination rates must be positive");
    const double ratio = daq_rate / illumination_rate;
    const double nearest = std::round(ratio);
    // Absorb representation error when the ratio is integral.
    const double n = std::abs(ratio - nearest) <= 1e-9 * nearest ? nearest : std::floor(ratio);
    detail::require(n >= 1.0, ErrorKind::invalid_argument,
                    "illumination rate exceeds the DAQ rate: fewer than one sample per pattern");
    return static_cast<std::size_t>(n);
  }

  std::size_t discarded_samples() const {
    const std::size_t n = samples_per_pattern();
    const auto d = static_cast<std::size_t>(std::ceil(settle_discard * static_cast<double>(n)));
    return d < n ? d : n - 1;
  }

  /// First-order time constant from the 10-90 % rise time: tau = t_r / ln 9.
  double time_constant() const { return rise_time / std::log(9.0); }

  /// An ideal detector: no noise, no lag.
  static DetectorConfig ideal(double illumination_rate = 1.0) {
    DetectorConfig c;
    c.illumination_rate = illumination_rate;
    c.daq_rate = illumination_rate;
    return c;
  }
};

/// Detector output level carried from one pattern into the next.
struct DetectorState {
  double level = 0.0;
  static DetectorState at_rest(const DetectorConfig& cfg) { return {cfg.dark_offset}; }
  friend bool operator==(const DetectorState&, const DetectorState&) = default;
};

struct MeasurementRecord {
  std::size_t step_index = 0;
  FrequencySample frequency;
  double phase = 0.0;
  double value = 0.0;
  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

/// Sum over pixels of pattern * reflectance, in flux units.
template <class T>
double ideal_response(const Grid<T>& pattern, const Scene& scene) {
  detail::require(pattern.same_shape(scene.reflectance), ErrorKind::dimension_mismatch,
                  "pattern is " + std::to_string(pattern.width()) + "x" + std::to_string(pattern.height()) +
                      " but scene is " + std::to_string(scene.width()) + "x" + std::to_string(scene.height()));
  const auto p = pattern.values();
  const auto r = scene.reflectance.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += static_cast<double>(p[i]) * r[i];
  return sum;
}

struct SimulatedReading {
  double value = 0.0;
  DetectorState state;
};

/// Detector reading for one pattern whose noiseless flux is already known.
inline SimulatedReading detect(double flux, const DetectorConfig& cfg, DetectorState carry, std::uint64_t seed,
                               std::size_t step_index) {
  const std::size_t n = cfg.samples_per_pattern();
  const std::size_t discard = cfg.discarded_samples();
  const double target = cfg.gain * flux + cfg.dark_offset;

  const double tau = cfg.time_constant();
  const double alpha = tau > 0.0 ? -std::expm1(-1.0 / (cfg.daq_rate * tau)) : 1.0;
  const GaussianStream noise(seed, step_index);

  double level = carry.level;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    level += alpha * (target - level);
    if (i < discard) continue;
    double sample = level;
    if (cfg.noise_sigma > 0.0) sample += cfg.noise_sigma * noise[i];
    sum += sample;
  }
  return {sum / static_cast<double>(n - discard), {level}};
}

struct MeasurementResult {
  MeasurementRecord record;
  DetectorState state;
};

template <class T>
MeasurementResult simulate_measurement(const Grid<T>& pattern, const Scene& scene, const DetectorConfig& cfg,
                                       DetectorState carry, std::uint64_t seed, const PlanStep& step,
                                       std::size_t step_index) {
  cfg.validate();
  const auto reading = detect(ideal_response(pattern, scene), cfg, carry, seed, step_index);
  return {{step_index, step.frequency, step.phase, reading.value}, reading.state};
}

/// Renders plan steps as illumination patterns.
class PatternSource {
 public:
  explicit PatternSource(const SamplingPlan& plan) : plan_(&plan) {}

  /// Noiseless flux of step `index` for each scene.
  void responses(std::size_t index, std::span<const Scene* const> scenes, std::span<double> out) const {
    const auto spec = plan_->pattern_spec(plan_->steps.at(index));
    const auto& p = plan_->pattern;
    if (p.kind == PatternKind::binary) {
      const auto pattern = binary_fourier_pattern(spec, p.mode, p.scan);
      for (std::size_t s = 0; s < scenes.size(); ++s) out[s] = ideal_response(pattern, *scenes[s]);
    } else {
      GrayPattern pattern;
      if (p.mode == UpsampleMode::analytic || spec.upsample == 1) {
        pattern = fourier_pattern(spec);
      } else {
        auto base = spec;
        base.upsample = 1;
        pattern = upsample_bicubic(fourier_pattern(base), spec.upsample);
      }
      for (std::size_t s = 0; s < scenes.size(); ++s) out[s] = ideal_response(pattern, *scenes[s]);
    }
  }

  const SamplingPlan& plan() const noexcept { return *plan_; }

 private:
  const SamplingPlan* plan_;
};

/// Computes the noiseless flux of plan step `index` for each scene.
using ResponseFn = std::function<void(std::size_t index, std::span<const Scene* const> scenes, std::span<double> out)>;

inline ResponseFn synthesized_patterns(const SamplingPlan& plan) {
  return [source = PatternSource(plan)](std::size_t i, std::span<const Scene* const> s, std::span<double> out) {
    source.responses(i, s, out);
  };
}

/// Uses pre-rendered binary patterns, one per plan step (e.g. read from a pattern pack).
inline ResponseFn stored_patterns(std::span<const BinaryPattern> patterns) {
  return [patterns](std::size_t i, std::span<const Scene* const> s, std::span<double> out) {
    detail::require(i < patterns.size(), ErrorKind::consistency, "no stored pattern for step " + std::to_string(i));
    for (std::size_t j = 0; j < s.size(); ++j) out[j] = ideal_response(patterns[i], *s[j]);
  };
}

namespace detail {
inline void check_scene(const SamplingPlan& plan, const Scene& scene) {
  const int size = plan.pattern_size();
  require(scene.width() == size && scene.height() == size, ErrorKind::dimension_mismatch,
          "scene is " + std::to_string(scene.width()) + "x" + std::to_string(scene.height()) +
              " but plan patterns are " + std::to_string(size) + "x" + std::to_string(size));
}
}  // namespace detail

/// Runs plan steps [first, last) for one scene, threading `carry` through them.
/// Splitting a run into consecutive chunks with the carried state gives the
/// same records as a single call.
inline std::vector<MeasurementRecord> run_steps(const SamplingPlan& plan, std::size_t first, std::size_t last,
                                                const Scene& scene, const DetectorConfig& cfg, std::uint64_t seed,
                                                DetectorState& carry, const ResponseFn& responses = {}) {
  cfg.validate();
  detail::check_scene(plan, scene);
  detail::require(first <= last && last <= plan.steps.size(), ErrorKind::invalid_argument, "step range out of plan");
  const ResponseFn source = responses ? responses : synthesized_patterns(plan);
  const Scene* scenes[] = {&scene};
  std::vector<MeasurementRecord> out;
  out.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) {
    double flux = 0.0;
    source(i, scenes, std::span<double>(&flux, 1));
    const auto reading = detect(flux, cfg, carry, seed, i);
    carry = reading.state;
    out.push_back({i, plan.steps[i].frequency, plan.steps[i].phase, reading.value});
  }
  return out;
}

inline std::vector<MeasurementRecord> run_plan(const SamplingPlan& plan, const Scene& scene,
                                               const DetectorConfig& cfg, std::uint64_t seed,
                                               const ResponseFn& responses = {}) {
  DetectorState carry = DetectorState::at_rest(cfg);
  return run_steps(plan, 0, plan.steps.size(), scene, cfg, seed, carry, responses);
}

/// Runs one plan over several scenes, rendering each pattern once. Every scene
/// has its own detector state and seed, so each result equals a separate run_plan.
inline std::vector<std::vector<MeasurementRecord>> run_plan_batch(const SamplingPlan& plan,
                                                                  std::span<const Scene> scenes,
                                                                  const DetectorConfig& cfg,
                                                                  std::span<const std::uint64_t> seeds,
                                                                  const ResponseFn& responses = {}) {
  cfg.validate();
  detail::require(seeds.size() == scenes.size(), ErrorKind::invalid_argument, "need one seed per scene");
  std::vector<const Scene*> ptrs;
  for (const auto& s : scenes) {
    detail::check_scene(plan, s);
    ptrs.push_back(&s);
  }
  std::vector<DetectorState> carry(scenes.size(), DetectorState::at_rest(cfg));
  std::vector<std::vector<MeasurementRecord>> out(scenes.size());
  for (auto& o : out) o.reserve(plan.steps.size());
  std::vector<double> flux(scenes.size());

  const ResponseFn source = responses ? responses : synthesized_patterns(plan);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    source(i, ptrs, flux);
    for (std::size_t s = 0; s < scenes.size(); ++s) {
      const auto reading = detect(flux[s], cfg, carry[s], seeds[s], i);
      carry[s] = reading.state;
      out[s].push_back({i, plan.steps[i].frequency, plan.steps[i].phase, reading.value});
    }
  }
  return out;
}

}  // namespace fsi
