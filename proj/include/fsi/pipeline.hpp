#pragma once

// End-to-end experiment commands shared by the CLI and the tests. Every
// command is a pure function of (config, input files, seed) and writes its
// artifacts plus a manifest into the configured output directory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsi/grid.hpp"
#include "fsi/io.hpp"
#include "fsi/patterns.hpp"
#include "fsi/reconstruct.hpp"
#include "fsi/sampling.hpp"
#include "fsi/sensor.hpp"

namespace fsi {

inline constexpr const char* tool_version = "fsi 1.0.0";

/// How per-channel / per-frame seeds derive from the base seed.
enum class SeedMode { increment, fixed };

inline std::string to_string(SeedMode m) { return m == SeedMode::increment ? "increment" : "fixed"; }

inline SeedMode parse_seed_mode(std::string_view text) {
  if (text == "increment") return SeedMode::increment;
  if (text == "fixed") return SeedMode::fixed;
  throw Error(ErrorKind::invalid_argument, "unknown seed mode '" + std::string(text) + "'");
}

struct ExperimentConfig {
  int n = 64;
  StrategyKind strategy = StrategyKind::full;
  std::size_t coefficients = 0;
  PhaseSchedule schedule = PhaseSchedule::three_step;
  double rate = 50.0;
  PatternParams pattern;
  DetectorConfig detector;
  bool ideal = false;
  std::uint64_t seed = 1;
  SeedMode seed_mode = SeedMode::increment;
  int bit_depth = 8;
  std::optional<double> export_low;
  std::optional<double> export_high;
  std::size_t channels = 1;  ///< only used by plan-report
  std::size_t frames = 1;    ///< only used by plan-report

  std::filesystem::path out_dir = "out";
  std::filesystem::path scene;
  std::vector<std::filesystem::path> color_scenes;
  std::filesystem::path frames_dir;
  std::filesystem::path plan_file;
  std::filesystem::path measurements_file;
  std::filesystem::path pack_file;
  std::filesystem::path reference;

  SamplingStrategy sampling_strategy() const {
    return strategy == StrategyKind::full ? SamplingStrategy::full() : SamplingStrategy::spiral(coefficients);
  }

  SamplingPlan make_plan() const { return build_plan(n, sampling_strategy(), schedule, rate, pattern); }

  DetectorConfig effective_detector() const {
    DetectorConfig d = detector;
    d.illumination_rate = rate;
    if (ideal) {
      d.noise_sigma = 0.0;
      d.rise_time = 0.0;
    }
    return d;
  }

  int maxval() const { return bit_depth == 16 ? 65535 : 255; }

  void validate() const {
    detail::require(bit_depth == 8 || bit_depth == 16, ErrorKind::invalid_argument, "bit depth must be 8 or 16");
    detail::require(channels >= 1 && frames >= 1, ErrorKind::invalid_argument, "channels and frames must be >= 1");
    make_plan();
    effective_detector().validate();
  }

  /// Echo of every parameter, using the CLI option names as keys.
  void record(io::RunManifest& m) const {
    m.set("n", n);
    m.set("strategy", to_string(strategy));
    m.set("coefficients", coefficients);
    m.set("schedule", to_string(schedule));
    m.set("rate", rate);
    m.set("mean", pattern.mean);
    m.set("contrast", pattern.contrast);
    m.set("upsample", pattern.upsample);
    m.set("mode", to_string(pattern.mode));
    m.set("patterns", to_string(pattern.kind));
    m.set("scan", to_string(pattern.scan));
    m.set("gain", detector.gain);
    m.set("dark-offset", detector.dark_offset);
    m.set("noise-sigma", detector.noise_sigma);
    m.set("rise-time", detector.rise_time);
    m.set("daq-rate", detector.daq_rate);
    m.set("settle-discard", detector.settle_discard);
    m.set("ideal", ideal);
    m.set("seed", seed);
    m.set("seed-mode", to_string(seed_mode));
    m.set("bit-depth", bit_depth);
    m.set("out", out_dir.string());
    if (!scene.empty()) m.set("scene", scene.string());
    if (!frames_dir.empty()) m.set("frames-dir", frames_dir.string());
    if (!plan_file.empty()) m.set("plan", plan_file.string());
    if (!measurements_file.empty()) m.set("measurements", measurements_file.string());
    if (!pack_file.empty()) m.set("pack", pack_file.string());
    if (!reference.empty()) m.set("reference", reference.string());
    if (export_low) m.set("export-low", *export_low);
    if (export_high) m.set("export-high", *export_high);
  }
};

/// Key/value lines printed by a command.
struct CommandReport {
  std::vector<std::pair<std::string, std::string>> lines;
  void add(std::string key, std::string value) { lines.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), io::format_number(value)); }
  void add(std::string key, std::size_t value) { add(std::move(key), std::to_string(value)); }
  std::string text() const {
    std::ostringstream os;
    for (const auto& [k, v] : lines) os << k << ": " << v << '\n';
    return os.str();
  }
};

namespace pipeline {

inline std::string psnr_text(const QualityReport& q) {
  return q.psnr_infinite() ? std::string("inf") : io::format_number(q.psnr_db);
}

/// Loads a PGM as reflectance in [0, 1].
inline Scene load_scene(const std::filesystem::path& path, Channel channel = Channel::mono) {
  return {io::to_unit(io::read_pgm(path)), channel};
}

/// Ground truth at reconstruction resolution: kN x kN inputs are block-averaged.
inline Grid<double> reference_at(const Grid<double>& ref, int n) {
  if (ref.width() == n && ref.height() == n) return ref;
  detail::require(ref.width() == ref.height() && ref.width() % n == 0, ErrorKind::dimension_mismatch,
                  "reference image is " + std::to_string(ref.width()) + "x" + std::to_string(ref.height()) +
                      ", not a multiple of " + std::to_string(n));
  return block_average(ref, ref.width() / n);
}

inline void ensure_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  detail::require(!ec, ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
}

inline io::RunManifest base_manifest(const ExperimentConfig& cfg, std::string_view command) {
  io::RunManifest m;
  m.set("tool-version", tool_version);
  m.set("command", command);
  cfg.record(m);
  return m;
}

inline void record_plan(io::RunManifest& m, const SamplingPlan& plan) {
  m.set("measurement-count", plan.measurement_count());
  m.set("frequency-count", plan.frequency_count());
  m.set("idealized-count", idealized_measurement_count(plan.image_size));
  m.set("acquisition-time-s", acquisition_time(plan));
}

inline SamplingPlan load_or_build_plan(const ExperimentConfig& cfg) {
  return cfg.plan_file.empty() ? cfg.make_plan() : io::read_plan(cfg.plan_file);
}

inline io::ExportScaling export_scaling(const ExperimentConfig& cfg, const Grid<double>& image) {
  auto s = io::ExportScaling::fit(image, cfg.maxval());
  if (cfg.export_low) s.low = *cfg.export_low;
  if (cfg.export_high) s.high = *cfg.export_high;
  return s;
}

inline std::uint64_t derived_seed(const ExperimentConfig& cfg, std::size_t index) {
  return cfg.seed_mode == SeedMode::fixed ? cfg.seed : cfg.seed + index;
}

// --- gen-patterns ---------------------------------------------------------

struct GenPatternsResult {
  SamplingPlan plan;
  std::size_t pack_bytes = 0;
  CommandReport report;
};

inline GenPatternsResult gen_patterns(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_out_dir(cfg.out_dir);
  GenPatternsResult r{cfg.make_plan(), 0, {}};
  const auto& plan = r.plan;
  const int size = plan.pattern_size();

  io::write_plan(cfg.out_dir / "plan.txt", plan);
  {
    auto os = io::detail::open_out(cfg.out_dir / "patterns.fspk", true);
    io::PatternPackWriter writer(os, size, size, static_cast<std::uint32_t>(plan.steps.size()));
    for (const auto& step : plan.steps)
      writer.append(binary_fourier_pattern(plan.pattern_spec(step), plan.pattern.mode, plan.pattern.scan));
    writer.close();
    r.pack_bytes = writer.header().file_size();
  }

  auto m = base_manifest(cfg, "gen-patterns");
  record_plan(m, plan);
  m.set("pack-bytes", r.pack_bytes);
  m.write(cfg.out_dir / "gen-patterns.manifest.toml");

  r.report.add("patterns", plan.measurement_count());
  r.report.add("pattern-size", std::to_string(size) + "x" + std::to_string(size));
  r.report.add("measurements", plan.measurement_count());
  r.report.add("idealized-measurements", idealized_measurement_count(cfg.n));
  r.report.add("pack-bytes", r.pack_bytes);
  r.report.add("plan", (cfg.out_dir / "plan.txt").string());
  r.report.add("pack", (cfg.out_dir / "patterns.fspk").string());
  return r;
}

// --- simulate -------------------------------------------------------------

struct SimulateResult {
  SamplingPlan plan;
  std::vector<MeasurementRecord> records;
  std::size_t samples_per_pattern = 0;
  CommandReport report;
};

inline SimulateResult simulate_scene(const ExperimentConfig& cfg, const SamplingPlan& plan, const Scene& scene,
                                     std::uint64_t seed, const std::filesystem::path& out_dir,
                                     std::string_view command) {
  const auto det = cfg.effective_detector();
  SimulateResult r{plan, {}, det.samples_per_pattern(), {}};
  if (!cfg.pack_file.empty()) {
    const auto patterns = io::read_pattern_pack(cfg.pack_file);
    detail::require(patterns.size() == plan.steps.size(), ErrorKind::consistency,
                    "pattern pack holds " + std::to_string(patterns.size()) + " patterns but the plan has " +
                        std::to_string(plan.steps.size()) + " steps");
    r.records = run_plan(plan, scene, det, seed, stored_patterns(patterns));
  } else {
    r.records = run_plan(plan, scene, det, seed);
  }

  ensure_out_dir(out_dir);
  io::write_measurements(out_dir / "measurements.csv", r.records);
  auto m = base_manifest(cfg, command);
  m.set("seed", seed);
  record_plan(m, plan);
  m.set("samples-per-pattern", r.samples_per_pattern);
  m.set("discarded-samples", det.discarded_samples());
  m.write(out_dir / "simulate.manifest.toml");

  r.report.add("measurements", r.records.size());
  r.report.add("samples-per-pattern", r.samples_per_pattern);
  r.report.add("acquisition-time-s", acquisition_time(plan));
  r.report.add("output", (out_dir / "measurements.csv").string());
  return r;
}

inline SimulateResult simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  detail::require(!cfg.scene.empty(), ErrorKind::invalid_argument, "simulate needs --scene");
  const auto plan = load_or_build_plan(cfg);
  return simulate_scene(cfg, plan, load_scene(cfg.scene), cfg.seed, cfg.out_dir, "simulate");
}

// --- reconstruct ----------------------------------------------------------

struct ReconstructResult {
  ReconstructedImage image;
  io::ExportScaling scaling;
  std::optional<QualityReport> quality;
  CommandReport report;
};

inline ReconstructResult reconstruct_records(const ExperimentConfig& cfg, const SamplingPlan& plan,
                                             std::span<const MeasurementRecord> records,
                                             const std::optional<Grid<double>>& reference,
                                             const std::filesystem::path& out_dir, std::string_view stem) {
  const double gain = cfg.detector.gain;
  ReconstructResult r;
  r.image = reconstruct(records, plan, gain, std::string(stem));
  r.scaling = export_scaling(cfg, r.image.values);

  ensure_out_dir(out_dir);
  const auto image_path = out_dir / (std::string(stem) + ".pgm");
  io::write_pgm(image_path, io::export_image(r.image.values, r.scaling));

  auto m = base_manifest(cfg, "reconstruct");
  record_plan(m, plan);
  m.set("normalization", normalization(plan, gain));
  m.set("export-low", r.scaling.low);
  m.set("export-high", r.scaling.high);
  m.set("export-maxval", r.scaling.maxval);

  r.report.add("image", image_path.string());
  r.report.add("export-low", r.scaling.low);
  r.report.add("export-high", r.scaling.high);
  if (reference) {
    r.quality = quality_metrics(r.image.values, reference_at(*reference, plan.image_size), 1.0);
    m.set("rmse", r.quality->rmse);
    m.set("psnr-db", psnr_text(*r.quality));
    r.report.add("rmse", r.quality->rmse);
    r.report.add("psnr-db", psnr_text(*r.quality));
  }
  m.write(out_dir / (std::string(stem) + ".manifest.toml"));
  return r;
}

inline ReconstructResult reconstruct_files(const ExperimentConfig& cfg) {
  detail::require(!cfg.plan_file.empty() && !cfg.measurements_file.empty(), ErrorKind::invalid_argument,
                  "reconstruct needs --plan and --measurements");
  const auto plan = io::read_plan(cfg.plan_file);
  const auto records = io::read_measurements(cfg.measurements_file);
  std::optional<Grid<double>> ref;
  if (!cfg.reference.empty()) ref = io::to_unit(io::read_pgm(cfg.reference));
  return reconstruct_records(cfg, plan, records, ref, cfg.out_dir, "reconstruction");
}

// --- metrics --------------------------------------------------------------

inline QualityReport metrics_files(const std::filesystem::path& image, const std::filesystem::path& reference) {
  const auto a = io::to_unit(io::read_pgm(image));
  const auto b = io::to_unit(io::read_pgm(reference));
  return quality_metrics(a, reference_at(b, a.width()), 1.0);
}

// --- pipeline -------------------------------------------------------------

/// Plan, simulate and reconstruct one scene in `out_dir`; identical to running
/// the stage commands with the same config.
inline ReconstructResult run_single(const ExperimentConfig& cfg, const Scene& scene, std::uint64_t seed,
                                    const std::filesystem::path& out_dir, CommandReport& report) {
  ensure_out_dir(out_dir);
  const auto plan = load_or_build_plan(cfg);
  io::write_plan(out_dir / "plan.txt", plan);
  const auto sim = simulate_scene(cfg, plan, scene, seed, out_dir, "pipeline");
  auto rec = reconstruct_records(cfg, plan, sim.records, scene.reflectance, out_dir, "reconstruction");
  for (const auto& l : sim.report.lines) report.lines.push_back(l);
  for (const auto& l : rec.report.lines) report.lines.push_back(l);
  return rec;
}

inline ReconstructResult run_pipeline(const ExperimentConfig& cfg, CommandReport& report) {
  cfg.validate();
  detail::require(!cfg.scene.empty(), ErrorKind::invalid_argument, "pipeline needs --scene");
  return run_single(cfg, load_scene(cfg.scene), cfg.seed, cfg.out_dir, report);
}

// --- color ----------------------------------------------------------------

struct ColorResult {
  std::vector<ReconstructResult> channels;
  double total_time_s = 0.0;
  CommandReport report;
};

inline ColorResult run_color(const ExperimentConfig& cfg) {
  cfg.validate();
  detail::require(cfg.color_scenes.size() == 3, ErrorKind::invalid_argument,
                  "color needs exactly three channel scenes (red, green, blue)");
  constexpr Channel order[] = {Channel::red, Channel::green, Channel::blue};
  std::vector<Scene> scenes;
  for (std::size_t c = 0; c < 3; ++c) scenes.push_back(load_scene(cfg.color_scenes[c], order[c]));
  for (const auto& s : scenes)
    detail::require(s.reflectance.same_shape(scenes.front().reflectance), ErrorKind::dimension_mismatch,
                    "color channel scenes differ in size");

  ColorResult r;
  const auto plan = load_or_build_plan(cfg);
  for (std::size_t c = 0; c < 3; ++c) {
    CommandReport sub;
    r.channels.push_back(
        run_single(cfg, scenes[c], derived_seed(cfg, c), cfg.out_dir / std::string(to_string(order[c])), sub));
    for (const auto& [k, v] : sub.lines) r.report.add(std::string(to_string(order[c])) + "." + k, v);
  }
  r.total_time_s = acquisition_time(3 * plan.measurement_count(), plan.rate);

  // Shared export range keeps relative channel intensities in the composite.
  double lo = r.channels[0].image.values.values()[0];
  double hi = lo;
  for (const auto& ch : r.channels) {
    const auto [a, b] = std::minmax_element(ch.image.values.values().begin(), ch.image.values.values().end());
    lo = std::min(lo, *a);
    hi = std::max(hi, *b);
  }
  io::ExportScaling shared{cfg.export_low.value_or(lo), cfg.export_high.value_or(hi), 255};
  io::write_ppm(cfg.out_dir / "color.ppm", io::export_image(r.channels[0].image.values, shared).pixels,
                io::export_image(r.channels[1].image.values, shared).pixels,
                io::export_image(r.channels[2].image.values, shared).pixels);

  auto m = base_manifest(cfg, "color");
  for (std::size_t c = 0; c < 3; ++c) {
    m.set(std::string("scene-") + std::string(to_string(order[c])), cfg.color_scenes[c].string());
    m.set(std::string("seed-") + std::string(to_string(order[c])), derived_seed(cfg, c));
  }
  record_plan(m, plan);
  m.set("total-acquisition-time-s", r.total_time_s);
  m.set("color-export-low", shared.low);
  m.set("color-export-high", shared.high);
  m.write(cfg.out_dir / "color.manifest.toml");

  r.report.add("total-acquisition-time-s", r.total_time_s);
  r.report.add("total-acquisition-time-min", r.total_time_s / 60.0);
  r.report.add("composite", (cfg.out_dir / "color.ppm").string());
  return r;
}

// --- dynamic --------------------------------------------------------------

struct DynamicResult {
  std::vector<ReconstructedImage> frames;
  std::vector<QualityReport> quality;
  double frames_per_second = 0.0;
  double total_time_s = 0.0;
  CommandReport report;
};

inline std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  detail::require(std::filesystem::is_directory(dir), ErrorKind::io, "frame directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline DynamicResult run_dynamic(const ExperimentConfig& cfg) {
  cfg.validate();
  detail::require(!cfg.frames_dir.empty(), ErrorKind::invalid_argument, "dynamic needs --frames-dir");
  const auto frame_paths = list_frames(cfg.frames_dir);
  detail::require(!frame_paths.empty(), ErrorKind::invalid_argument,
                  "no .pgm frames in '" + cfg.frames_dir.string() + "'");
  const auto plan = load_or_build_plan(cfg);
  const auto det = cfg.effective_detector();
  ensure_out_dir(cfg.out_dir);
  io::write_plan(cfg.out_dir / "plan.txt", plan);

  DynamicResult r;
  // Frames run in small batches so each pattern is rendered once per batch;
  // each frame starts from a detector at rest with its own seed.
  constexpr std::size_t batch = 8;
  for (std::size_t first = 0; first < frame_paths.size(); first += batch) {
    const std::size_t last = std::min(first + batch, frame_paths.size());
    std::vector<Scene> scenes;
    std::vector<std::uint64_t> seeds;
    for (std::size_t f = first; f < last; ++f) {
      scenes.push_back(load_scene(frame_paths[f]));
      seeds.push_back(derived_seed(cfg, f));
    }
    const auto runs = run_plan_batch(plan, scenes, det, seeds);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu", first + i);
      auto img = reconstruct(runs[i], plan, cfg.detector.gain, name);
      const auto q = quality_metrics(img.values, reference_at(scenes[i].reflectance, plan.image_size), 1.0);
      const auto scaling = export_scaling(cfg, img.values);
      io::write_pgm(cfg.out_dir / (std::string(name) + ".pgm"), io::export_image(img.values, scaling));
      r.frames.push_back(std::move(img));
      r.quality.push_back(q);
    }
  }
  const double frame_time = acquisition_time(plan);
  r.frames_per_second = plan.rate / static_cast<double>(plan.measurement_count());
  r.total_time_s = acquisition_time(plan.measurement_count() * r.frames.size(), plan.rate);

  double mean_rmse = 0.0;
  for (const auto& q : r.quality) mean_rmse += q.rmse;
  mean_rmse /= static_cast<double>(r.quality.size());

  auto m = base_manifest(cfg, "dynamic");
  record_plan(m, plan);
  m.set("frames", r.frames.size());
  m.set("samples-per-pattern", det.samples_per_pattern());
  m.set("frames-per-second", r.frames_per_second);
  m.set("total-acquisition-time-s", r.total_time_s);
  m.set("mean-rmse", mean_rmse);
  m.write(cfg.out_dir / "dynamic.manifest.toml");

  r.report.add("frames", r.frames.size());
  r.report.add("measurements-per-frame", plan.measurement_count());
  r.report.add("frame-time-s", frame_time);
  r.report.add("frames-per-second", r.frames_per_second);
  r.report.add("total-acquisition-time-s", r.total_time_s);
  r.report.add("mean-rmse", mean_rmse);
  return r;
}

// --- plan-report ----------------------------------------------------------

/// Value rounded to `digits` significant figures in fixed notation; integer
/// parts are never rounded away (1966.08 -> "1966").
inline std::string significant(double value, int digits) {
  const int magnitude = value == 0.0 ? 0 : static_cast<int>(std::floor(std::log10(std::abs(value))));
  const int decimals = std::max(0, digits - 1 - magnitude);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

inline CommandReport plan_report(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto plan = cfg.make_plan();
  const auto det = cfg.effective_detector();
  const std::size_t ideal_m = idealized_measurement_count(cfg.n);
  const double t = acquisition_time(plan);
  const double t_ideal = acquisition_time(ideal_m, cfg.rate);
  const io::PatternPackHeader pack{io::pack_version, static_cast<std::uint32_t>(plan.pattern_size()),
                                   static_cast<std::uint32_t>(plan.pattern_size()),
                                   static_cast<std::uint32_t>(plan.measurement_count())};

  CommandReport r;
  r.add("image-size", std::to_string(cfg.n) + "x" + std::to_string(cfg.n));
  r.add("pattern-size", std::to_string(plan.pattern_size()) + "x" + std::to_string(plan.pattern_size()));
  r.add("strategy", std::string(to_string(cfg.strategy)));
  r.add("coefficients", plan.frequency_count());
  r.add("schedule", std::string(to_string(cfg.schedule)));
  r.add("measurements", plan.measurement_count());
  r.add("idealized-measurements", ideal_m);
  r.add("rate-hz", cfg.rate);
  r.add("acquisition-time-s", t);
  r.add("acquisition-time-display", significant(t, 3) + " s = " + significant(t / 60.0, 3) + " min");
  r.add("idealized-acquisition-time-s", t_ideal);
  r.add("idealized-acquisition-time-display",
        significant(t_ideal, 3) + " s = " + significant(t_ideal / 60.0, 3) + " min");
  r.add("compression-rate", compression_rate(plan.frequency_count(), cfg.n));
  r.add("compression-display", significant(100.0 * compression_rate(plan.frequency_count(), cfg.n), 3) + " %");
  r.add("frames-per-second", cfg.rate / static_cast<double>(plan.measurement_count()));
  r.add("samples-per-pattern", det.samples_per_pattern());
  r.add("pack-bytes", pack.file_size());
  r.add("pack-bytes-8bit", static_cast<std::size_t>(plan.pattern_size()) * plan.pattern_size() *
                               plan.measurement_count());
  if (cfg.channels > 1) {
    r.add("channels", cfg.channels);
    const double total = acquisition_time(plan.measurement_count() * cfg.channels, cfg.rate);
    r.add("total-time-s", total);
    r.add("total-time-display", significant(total / 60.0, 3) + " min");
  }
  if (cfg.frames > 1) {
    r.add("frames", cfg.frames);
    const double total = acquisition_time(plan.measurement_count() * cfg.frames, cfg.rate);
    r.add("total-time-s", total);
    r.add("total-time-display", significant(total, 3) + " s");
  }
  return r;
}

}  // namespace pipeline
}  // namespace fsi
