#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fsi/patterns.hpp"
#include "fsi/random.hpp"
#include "fsi/sensor.hpp"
#include "oracles.hpp"

namespace fsi {
namespace {

Scene scene_of(Grid<double> g) { return {std::move(g), Channel::mono}; }

SamplingPlan small_plan(int n = 8, PatternKind kind = PatternKind::grayscale) {
  PatternParams p;
  p.kind = kind;
  p.mode = UpsampleMode::analytic;
  return build_plan(n, SamplingStrategy::full(), PhaseSchedule::three_step, 50.0, p);
}

TEST(Philox, KnownAnswerVectors) {
  // Reference vectors distributed with Random123 (kat_vectors, philox4x32 10 rounds).
  EXPECT_EQ(Philox4x32({0u, 0u})({0u, 0u, 0u, 0u}),
            (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32({0xffffffffu, 0xffffffffu})({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}),
            (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32({0xa4093822u, 0x299f31d0u})({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}),
            (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(GaussianStream, MomentsAndAddressing) {
  const GaussianStream g(42, 7);
  double s = 0.0, s2 = 0.0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const double x = g[static_cast<std::uint64_t>(i)];
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_EQ(g[12345], GaussianStream(42, 7)[12345]);
  EXPECT_NE(g[0], GaussianStream(42, 8)[0]);
  EXPECT_NE(g[0], GaussianStream(43, 7)[0]);
}

TEST(IdealResponse, Basics) {
  EXPECT_EQ(ideal_response(GrayPattern(4, 4, 1.0), scene_of(Grid<double>(4, 4, 1.0))), 16.0);
  std::mt19937_64 rng(3);
  EXPECT_EQ(ideal_response(oracle::random_grid(4, 4, rng), scene_of(Grid<double>(4, 4, 0.0))), 0.0);
  EXPECT_THROW(ideal_response(GrayPattern(4, 4, 1.0), scene_of(Grid<double>(4, 5, 1.0))), Error);
}

TEST(IdealResponse, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const auto r = oracle::random_grid(8, 8, rng);
    PatternSpec s;
    s.u = t % 5 - 2;
    s.v = t % 3;
    s.phase = 0.3 * t;
    s.base_size = 8;
    const auto p = fourier_pattern(s);
    const double expected = oracle::inner_product(p, r);
    EXPECT_NEAR(ideal_response(p, scene_of(r)), expected, 1e-12 * std::abs(expected));
  }
}

TEST(DetectorConfig, SampleCounts) {
  DetectorConfig c;
  c.daq_rate = 500'000;
  c.illumination_rate = 50;
  EXPECT_EQ(c.samples_per_pattern(), 10'000u);
  c.illumination_rate = 10'000;
  EXPECT_EQ(c.samples_per_pattern(), 50u);
  c.illumination_rate = 20'000;
  EXPECT_EQ(c.samples_per_pattern(), 25u);
  c.illumination_rate = 30'000;
  EXPECT_EQ(c.samples_per_pattern(), 16u);
  c.illumination_rate = 600'000;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(c.samples_per_pattern(), Error);
}

TEST(DetectorConfig, Validation) {
  DetectorConfig c;
  c.illumination_rate = 50;
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.settle_discard = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.noise_sigma = -1;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.rise_time = -1e-6;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(SimulateMeasurement, NoiselessNoLagIsAffine) {
  std::mt19937_64 rng(8);
  const auto scene = scene_of(oracle::random_grid(8, 8, rng));
  DetectorConfig c;
  c.gain = 2.5;
  c.dark_offset = 0.125;
  for (double rate : {50.0, 20'000.0, 500'000.0}) {
    c.illumination_rate = rate;
    const auto p = oracle::random_grid(8, 8, rng);
    const auto res = simulate_measurement(p, scene, c, DetectorState{123.0}, 1, PlanStep{{1, 2}, 0.5}, 9);
    const double expected = 2.5 * ideal_response(p, scene) + 0.125;
    // Averaging n_s equal samples costs a few ulps per thousand additions.
    EXPECT_NEAR(res.record.value, expected, 1e-12 * std::abs(expected));
    EXPECT_EQ(res.record.step_index, 9u);
    EXPECT_EQ(res.record.frequency, (FrequencySample{1, 2}));
  }
}

TEST(SimulateMeasurement, LagFollowsSinglePoleStep) {
  DetectorConfig c;
  c.daq_rate = 1000.0;
  c.illumination_rate = 100.0;
  c.rise_time = 0.01;
  const auto scene = scene_of(Grid<double>(1, 1, 1.0));
  const auto res = simulate_measurement(GrayPattern(1, 1, 1.0), scene, c, DetectorState{0.0}, 0, {}, 0);
  // Closed form: level after i samples is 1 - exp(-i dt / tau).
  const double tau = 0.01 / std::log(9.0);
  double mean = 0.0;
  for (int i = 1; i <= 10; ++i) mean += 1.0 - std::exp(-i * 0.001 / tau);
  EXPECT_NEAR(res.record.value, mean / 10.0, 1e-12);
  EXPECT_NEAR(res.state.level, 1.0 - std::exp(-0.01 / tau), 1e-12);
  // 10-90 % rise takes rise_time: level(t) = 0.9 at t90 - t10 = rise_time.
  EXPECT_NEAR(tau * (std::log(10.0) - std::log(10.0 / 9.0)), 0.01, 1e-15);
}

TEST(SimulateMeasurement, SettleDiscardDropsLeadingSamples) {
  DetectorConfig c;
  c.daq_rate = 1000.0;
  c.illumination_rate = 100.0;
  c.rise_time = 0.005;
  const auto scene = scene_of(Grid<double>(1, 1, 1.0));
  const auto all = simulate_measurement(GrayPattern(1, 1, 1.0), scene, c, DetectorState{0.0}, 0, {}, 0);
  c.settle_discard = 0.5;
  const auto late = simulate_measurement(GrayPattern(1, 1, 1.0), scene, c, DetectorState{0.0}, 0, {}, 0);
  EXPECT_GT(late.record.value, all.record.value);
  EXPECT_EQ(all.state, late.state);
  EXPECT_EQ(c.discarded_samples(), 5u);
}

TEST(SimulateMeasurement, NoiseAveragesAsInverseSqrt) {
  const auto scene = scene_of(Grid<double>(2, 2, 0.5));
  const GrayPattern p(2, 2, 1.0);
  for (double rate : {20'000.0, 1'250.0}) {
    DetectorConfig c;
    c.noise_sigma = 1.0;
    c.illumination_rate = rate;
    const double ns = static_cast<double>(c.samples_per_pattern());
    double s = 0.0, s2 = 0.0;
    const int trials = 1000;
    for (int seed = 0; seed < trials; ++seed) {
      const double v = simulate_measurement(p, scene, c, DetectorState{0.0}, seed, {}, 0).record.value;
      s += v;
      s2 += v * v;
    }
    const double mean = s / trials;
    const double sd = std::sqrt(s2 / trials - mean * mean);
    EXPECT_GT(sd, 0.8 / std::sqrt(ns));
    EXPECT_LT(sd, 1.2 / std::sqrt(ns));
  }
}

TEST(RunPlan, EmptyPlanGivesNoRecords) {
  auto plan = small_plan(4);
  plan.steps.clear();
  EXPECT_TRUE(run_plan(plan, scene_of(Grid<double>(4, 4, 0.5)), DetectorConfig::ideal(), 1).empty());
}

TEST(RunPlan, IdealRunEqualsInnerProducts) {
  std::mt19937_64 rng(12);
  const auto plan = small_plan(8);
  const auto r = oracle::random_grid(8, 8, rng);
  DetectorConfig c = DetectorConfig::ideal();
  c.gain = 3.0;
  c.dark_offset = -0.5;
  const auto records = run_plan(plan, scene_of(r), c, 77);
  ASSERT_EQ(records.size(), plan.steps.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& st = plan.steps[i];
    Grid<double> pat(8, 8);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) pat(x, y) = oracle::sinusoid(st.frequency.u, st.frequency.v, st.phase, 0.5, 0.5, 8, 1, x, y);
    EXPECT_NEAR(records[i].value, 3.0 * oracle::inner_product(pat, r) - 0.5, 1e-10);
    EXPECT_EQ(records[i].step_index, i);
    EXPECT_EQ(records[i].frequency, st.frequency);
    EXPECT_EQ(records[i].phase, st.phase);
  }
}

TEST(RunPlan, SceneSizeMustMatchPatterns) {
  auto plan = small_plan(8);
  plan.pattern.upsample = 2;
  EXPECT_THROW(run_plan(plan, scene_of(Grid<double>(8, 8, 0.5)), DetectorConfig::ideal(), 1), Error);
  EXPECT_NO_THROW(run_plan(plan, scene_of(Grid<double>(16, 16, 0.5)), DetectorConfig::ideal(), 1));
}

DetectorConfig realistic(double rate) {
  DetectorConfig c;
  c.noise_sigma = 0.3;
  c.rise_time = 7e-6;
  c.daq_rate = 500'000;
  c.illumination_rate = rate;
  c.dark_offset = 0.2;
  return c;
}

TEST(RunPlan, ChunkedExecutionMatchesSingleRun) {
  std::mt19937_64 rng(13);
  const auto plan = small_plan(8, PatternKind::binary);
  const auto scene = scene_of(oracle::random_grid(8, 8, rng));
  const auto cfg = realistic(20'000);
  const auto whole = run_plan(plan, scene, cfg, 5);
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, std::size_t{17}, plan.steps.size()}) {
    DetectorState carry = DetectorState::at_rest(cfg);
    auto a = run_steps(plan, 0, j, scene, cfg, 5, carry);
    const auto b = run_steps(plan, j, plan.steps.size(), scene, cfg, 5, carry);
    a.insert(a.end(), b.begin(), b.end());
    EXPECT_EQ(a, whole) << "split at " << j;
  }
}

TEST(RunPlan, NoiseDependsOnlyOnSeedAndStep) {
  std::mt19937_64 rng(14);
  const auto plan = small_plan(8);
  const auto scene = scene_of(oracle::random_grid(8, 8, rng));
  auto cfg = realistic(10'000);
  cfg.rise_time = 0.0;
  const auto whole = run_plan(plan, scene, cfg, 99);
  EXPECT_EQ(whole, run_plan(plan, scene, cfg, 99));
  EXPECT_NE(whole, run_plan(plan, scene, cfg, 100));
  // Evaluating a single step in isolation (no lag, so no carry dependence) gives the same value.
  for (std::size_t i : {std::size_t{3}, std::size_t{40}, plan.steps.size() - 1}) {
    DetectorState carry{123.0};
    EXPECT_EQ(run_steps(plan, i, i + 1, scene, cfg, 99, carry).front(), whole[i]);
  }
}

TEST(RunPlan, BatchEqualsSeparateRuns) {
  std::mt19937_64 rng(15);
  const auto plan = small_plan(8, PatternKind::binary);
  std::vector<Scene> scenes;
  for (int i = 0; i < 3; ++i) scenes.push_back(scene_of(oracle::random_grid(8, 8, rng)));
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto cfg = realistic(20'000);
  const auto batch = run_plan_batch(plan, scenes, cfg, seeds);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(batch[i], run_plan(plan, scenes[i], cfg, seeds[i]));
}

TEST(RunPlan, StoredPatternsMatchSynthesized) {
  std::mt19937_64 rng(16);
  auto plan = small_plan(8, PatternKind::binary);
  plan.pattern.upsample = 2;
  plan.pattern.mode = UpsampleMode::bicubic;
  const auto scene = scene_of(oracle::random_grid(16, 16, rng));
  std::vector<BinaryPattern> stored;
  for (const auto& s : plan.steps) stored.push_back(binary_fourier_pattern(plan.pattern_spec(s), UpsampleMode::bicubic));
  const auto cfg = realistic(10'000);
  EXPECT_EQ(run_plan(plan, scene, cfg, 3, stored_patterns(stored)), run_plan(plan, scene, cfg, 3));
}

TEST(RunPlan, VarianceShrinksWithMoreSamples) {
  const auto scene = scene_of(Grid<double>(4, 4, 0.5));
  const GrayPattern p(4, 4, 1.0);
  double previous = INFINITY;
  for (double rate : {20'000.0, 2'000.0, 200.0}) {
    DetectorConfig c;
    c.noise_sigma = 1.0;
    c.illumination_rate = rate;
    double s = 0.0, s2 = 0.0;
    for (int seed = 0; seed < 400; ++seed) {
      const double v = simulate_measurement(p, scene, c, DetectorState{0.0}, seed, {}, 0).record.value;
      s += v;
      s2 += v * v;
    }
    const double var = s2 / 400 - (s / 400) * (s / 400);
    EXPECT_LE(var, previous);
    previous = var;
  }
}

}  // namespace
}  // namespace fsi
