// fsi: command-line driver for binary-illumination Fourier single-pixel imaging
// simulations.
//
// All options live on the top-level app and may appear after the subcommand.
// The same keys are accepted from a TOML/INI config file (--config), with
// command-line flags taking precedence. Written manifests are valid configs.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "fsi/fsi.hpp"

namespace {

template <class Enum>
std::map<std::string, Enum> choices(std::initializer_list<Enum> values) {
  std::map<std::string, Enum> out;
  for (auto v : values) out.emplace(std::string(fsi::to_string(v)), v);
  return out;
}

void print(const fsi::CommandReport& r) { std::cout << r.text(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary-illumination Fourier single-pixel imaging simulator"};
  app.set_version_flag("--version", fsi::tool_version);
  app.set_config("--config", "", "Read options from a TOML/INI file (e.g. a previous run manifest)");
  app.fallthrough();
  app.require_subcommand(1);

  fsi::ExperimentConfig cfg;
  std::string scene, frames_dir, plan, measurements, pack, reference, out = cfg.out_dir.string();
  std::vector<std::string> color_scenes;
  std::string image;
  std::optional<double> export_low, export_high;

  app.add_option("--n", cfg.n, "Reconstructed image size N (even)")->capture_default_str();
  app.add_option("--strategy", cfg.strategy, "Sampling strategy")
      ->transform(CLI::CheckedTransformer(choices({fsi::StrategyKind::full, fsi::StrategyKind::spiral})))
      ->capture_default_str();
  app.add_option("--coefficients", cfg.coefficients, "Spiral coefficient count m")->capture_default_str();
  app.add_option("--schedule", cfg.schedule, "Phase-shifting schedule")
      ->transform(CLI::CheckedTransformer(choices({fsi::PhaseSchedule::three_step, fsi::PhaseSchedule::four_step})));
  app.add_option("--rate", cfg.rate, "Illumination rate R in patterns/s")->capture_default_str();
  app.add_option("--mean", cfg.pattern.mean, "Pattern mean intensity a")->capture_default_str();
  app.add_option("--contrast", cfg.pattern.contrast, "Pattern contrast b")->capture_default_str();
  app.add_option("--upsample", cfg.pattern.upsample, "Upsampling factor k")->capture_default_str();
  app.add_option("--mode", cfg.pattern.mode, "Upsampling mode")
      ->transform(CLI::CheckedTransformer(choices({fsi::UpsampleMode::bicubic, fsi::UpsampleMode::analytic})));
  app.add_option("--patterns", cfg.pattern.kind, "Illumination pattern kind")
      ->transform(CLI::CheckedTransformer(choices({fsi::PatternKind::binary, fsi::PatternKind::grayscale})));
  app.add_option("--scan", cfg.pattern.scan, "Dithering scan order")
      ->transform(CLI::CheckedTransformer(choices({fsi::ScanOrder::raster, fsi::ScanOrder::serpentine})));
  app.add_option("--gain", cfg.detector.gain, "Detector gain")->capture_default_str();
  app.add_option("--dark-offset", cfg.detector.dark_offset, "Detector dark offset")->capture_default_str();
  app.add_option("--noise-sigma", cfg.detector.noise_sigma, "Noise std-dev per DAQ sample")->capture_default_str();
  app.add_option("--rise-time", cfg.detector.rise_time, "Detector 10-90% rise time in seconds")->capture_default_str();
  app.add_option("--daq-rate", cfg.detector.daq_rate, "DAQ sampling rate in samples/s")->capture_default_str();
  app.add_option("--settle-discard", cfg.detector.settle_discard, "Fraction of leading samples dropped per pattern")
      ->capture_default_str();
  app.add_flag("--ideal", cfg.ideal, "Zero the detector noise and rise time");
  app.add_option("--seed", cfg.seed, "Noise seed")->capture_default_str();
  app.add_option("--seed-mode", cfg.seed_mode, "Per-channel/per-frame seeds: increment or fixed")
      ->transform(CLI::CheckedTransformer(choices({fsi::SeedMode::increment, fsi::SeedMode::fixed})));
  app.add_option("--bit-depth", cfg.bit_depth, "Exported PGM bit depth (8 or 16)")->capture_default_str();
  app.add_option("--export-low", export_low, "Value mapped to 0 on export (default: image minimum)");
  app.add_option("--export-high", export_high, "Value mapped to maxval on export (default: image maximum)");
  app.add_option("--channels", cfg.channels, "Channel count for plan-report totals")->capture_default_str();
  app.add_option("--frames", cfg.frames, "Frame count for plan-report totals")->capture_default_str();
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--scene", scene, "Scene PGM (kN x kN)");
  app.add_option("--color-scenes", color_scenes, "Red, green and blue scene PGMs")->expected(3)->delimiter(',');
  app.add_option("--frames-dir", frames_dir, "Directory of frame PGMs for dynamic imaging");
  app.add_option("--plan", plan, "Plan file");
  app.add_option("--measurements", measurements, "Measurement file");
  app.add_option("--pack", pack, "Pattern pack to illuminate instead of synthesizing patterns");
  app.add_option("--reference", reference, "Ground-truth PGM for metrics");
  app.add_option("--image", image, "Image PGM to score (metrics)");

  auto* gen = app.add_subcommand("gen-patterns", "Write the plan and its binary pattern pack");
  auto* sim = app.add_subcommand("simulate", "Simulate detector readings for a scene");
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct an image from plan + measurements");
  auto* met = app.add_subcommand("metrics", "RMSE / PSNR of an image against a reference");
  auto* col = app.add_subcommand("color", "Three-channel true-color acquisition");
  auto* dyn = app.add_subcommand("dynamic", "Per-frame spiral acquisition of a frame sequence");
  auto* pip = app.add_subcommand("pipeline", "Plan, simulate and reconstruct one scene");
  auto* rep = app.add_subcommand("plan-report", "Measurement counts, timing and storage for a plan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: invalid_argument: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  }

  cfg.out_dir = out;
  cfg.scene = scene;
  cfg.frames_dir = frames_dir;
  cfg.plan_file = plan;
  cfg.measurements_file = measurements;
  cfg.pack_file = pack;
  cfg.reference = reference;
  cfg.export_low = export_low;
  cfg.export_high = export_high;
  for (const auto& s : color_scenes) cfg.color_scenes.emplace_back(s);

  try {
    if (gen->parsed()) {
      print(fsi::pipeline::gen_patterns(cfg).report);
    } else if (sim->parsed()) {
      print(fsi::pipeline::simulate(cfg).report);
    } else if (rec->parsed()) {
      print(fsi::pipeline::reconstruct_files(cfg).report);
    } else if (met->parsed()) {
      fsi::detail::require(!image.empty() && !reference.empty(), fsi::ErrorKind::invalid_argument,
                           "metrics needs --image and --reference");
      const auto q = fsi::pipeline::metrics_files(image, reference);
      std::cout << "rmse: " << fsi::io::format_number(q.rmse) << "\npsnr-db: " << fsi::pipeline::psnr_text(q) << '\n';
    } else if (col->parsed()) {
      print(fsi::pipeline::run_color(cfg).report);
    } else if (dyn->parsed()) {
      print(fsi::pipeline::run_dynamic(cfg).report);
    } else if (pip->parsed()) {
      fsi::CommandReport report;
      fsi::pipeline::run_pipeline(cfg, report);
      print(report);
    } else if (rep->parsed()) {
      print(fsi::pipeline::plan_report(cfg));
    }
  } catch (const fsi::Error& e) {
    std::cerr << "error: " << fsi::to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
