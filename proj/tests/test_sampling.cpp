#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "fsi/sampling.hpp"

namespace fsi {
namespace {

std::vector<FrequencySample> fs(std::initializer_list<std::pair<int, int>> pairs) {
  std::vector<FrequencySample> out;
  for (auto [u, v] : pairs) out.push_back({u, v});
  return out;
}

TEST(HalfPlane, SizeTwoCoversAllSelfConjugateBins) {
  const auto h = half_plane_frequencies(2);
  EXPECT_EQ(h, fs({{0, 0}, {0, -1}, {-1, 0}, {-1, -1}}));
  for (auto f : h) EXPECT_TRUE(is_self_conjugate(f, 2));
}

TEST(HalfPlane, SizeFourHasTenBins) { EXPECT_EQ(half_plane_frequencies(4).size(), 10u); }

TEST(HalfPlane, DcComesFirst) {
  for (int n : {2, 4, 6, 8, 32}) EXPECT_EQ(half_plane_frequencies(n).front(), (FrequencySample{0, 0}));
}

TEST(HalfPlane, RejectsOddOrTinySizes) {
  EXPECT_THROW(half_plane_frequencies(3), Error);
  EXPECT_THROW(half_plane_frequencies(0), Error);
  EXPECT_THROW(half_plane_frequencies(-4), Error);
}

TEST(HalfPlane, TilesTheSpectrumByEnumeration) {
  for (int n : {2, 4, 6, 8, 16}) {
    const auto h = half_plane_frequencies(n);
    std::set<FrequencySample> members(h.begin(), h.end());
    ASSERT_EQ(members.size(), h.size());

    int self = 0;
    for (int v = -n / 2; v < n / 2; ++v) {
      for (int u = -n / 2; u < n / 2; ++u) {
        const FrequencySample f{u, v};
        const auto c = conjugate(f, n);
        const bool direct = members.count(f) > 0;
        const bool mirrored = members.count(c) > 0;
        EXPECT_TRUE(direct || mirrored) << n << ": (" << u << "," << v << ") uncovered";
        // Only self-conjugate bins appear together with their mirror.
        EXPECT_EQ(direct && mirrored, f == c && direct);
        // Self-conjugate means (-u mod n, -v mod n) == (u mod n, v mod n).
        const bool sc = ((-u % n + n) % n == (u % n + n) % n) && ((-v % n + n) % n == (v % n + n) % n);
        EXPECT_EQ(sc, is_self_conjugate(f, n));
        self += sc;
      }
    }
    EXPECT_EQ(self, 4);
  }
}

TEST(HalfPlane, CountLaw) {
  for (int n = 2; n <= 64; n += 2) {
    EXPECT_EQ(half_plane_frequencies(n).size(), static_cast<std::size_t>(n * n / 2 + 2)) << n;
    EXPECT_EQ(half_plane_size(n), static_cast<std::size_t>(n * n / 2 + 2));
  }
}

TEST(SpiralPath, DcOnly) {
  for (int n : {2, 8, 128}) EXPECT_EQ(spiral_path(n, 1), fs({{0, 0}}));
}

TEST(SpiralPath, FirstFiveAtSizeEight) {
  EXPECT_EQ(spiral_path(8, 5), fs({{0, 0}, {1, 0}, {0, 1}, {1, -1}, {1, 1}}));
}

TEST(SpiralPath, MatchesRadiusThenAtan2Order) {
  const int n = 16;
  const auto path = half_plane_frequencies(n);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto a = path[i - 1], b = path[i];
    const int ra = a.u * a.u + a.v * a.v, rb = b.u * b.u + b.v * b.v;
    ASSERT_LE(ra, rb);
    if (ra == rb) {
      EXPECT_LT(std::atan2(a.v, a.u), std::atan2(b.v, b.u));
    }
  }
}

TEST(SpiralPath, PrefixProperty) {
  const int n = 12;
  for (std::size_t m = 1; m < half_plane_size(n); ++m) {
    const auto a = spiral_path(n, m);
    const auto b = spiral_path(n, m + 1);
    ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(SpiralPath, RejectsOutOfRange) {
  EXPECT_THROW(spiral_path(8, 0), Error);
  EXPECT_THROW(spiral_path(8, 35), Error);
  EXPECT_NO_THROW(spiral_path(8, 34));
}

TEST(SpiralPath, CompressionRate) {
  EXPECT_EQ(compression_rate(333, 128), 666.0 / 16384.0);
  EXPECT_NEAR(100.0 * compression_rate(333, 128), 4.065, 5e-4);
}

TEST(BuildPlan, MeasurementCounts) {
  const auto full256 = build_plan(256, SamplingStrategy::full(), PhaseSchedule::three_step, 50.0);
  EXPECT_EQ(full256.measurement_count(), 98'310u);
  EXPECT_EQ(idealized_measurement_count(256), 98'304u);
  EXPECT_EQ(full256.measurement_count() - idealized_measurement_count(256), 6u);

  EXPECT_EQ(build_plan(128, SamplingStrategy::spiral(333), PhaseSchedule::three_step, 1e4).measurement_count(), 999u);
  EXPECT_EQ(build_plan(4, SamplingStrategy::full(), PhaseSchedule::four_step, 1.0).measurement_count(), 40u);
}

TEST(BuildPlan, StepsGroupedAndOrdered) {
  const auto plan = build_plan(8, SamplingStrategy::full(), PhaseSchedule::four_step, 1.0);
  const auto phases = schedule_phases(PhaseSchedule::four_step);
  ASSERT_EQ(plan.steps.size(), 4 * half_plane_size(8));
  const auto freqs = half_plane_frequencies(8);
  EXPECT_EQ(plan.frequencies(), freqs);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    EXPECT_EQ(plan.steps[i].frequency, freqs[i / 4]);
    EXPECT_EQ(plan.steps[i].phase, phases[i % 4]);
  }
}

TEST(BuildPlan, RejectsBadParameters) {
  EXPECT_THROW(build_plan(8, SamplingStrategy::full(), PhaseSchedule::three_step, 0.0), Error);
  EXPECT_THROW(build_plan(7, SamplingStrategy::full(), PhaseSchedule::three_step, 1.0), Error);
  EXPECT_THROW(build_plan(8, SamplingStrategy::spiral(0), PhaseSchedule::three_step, 1.0), Error);
  PatternParams p;
  p.contrast = 0.6;
  EXPECT_THROW(build_plan(8, SamplingStrategy::full(), PhaseSchedule::three_step, 1.0, p), Error);
}

TEST(AcquisitionTime, ReproducesQuotedFigures) {
  EXPECT_EQ(acquisition_time(98'304, 50.0), 1966.08);
  EXPECT_EQ(acquisition_time(98'304, 10'000.0), 9.8304);
  EXPECT_EQ(acquisition_time(98'304, 20'000.0), 4.9152);
  EXPECT_EQ(acquisition_time(999, 10'000.0), 0.0999);
  EXPECT_THROW(acquisition_time(10, 0.0), Error);
  EXPECT_THROW(acquisition_time(10, -5.0), Error);
}

TEST(AcquisitionTime, ExactRationalScaling) {
  // t must equal the correctly rounded value of the reduced fraction M/R.
  for (std::size_t m : {1u, 3u, 999u, 98'304u, 98'310u}) {
    for (long r : {1L, 7L, 50L, 10'000L, 20'000L, 123'457L}) {
      const long g = std::gcd(static_cast<long>(m), r);
      EXPECT_EQ(acquisition_time(m, static_cast<double>(r)),
                static_cast<double>(static_cast<long>(m) / g) / static_cast<double>(r / g));
      EXPECT_EQ(acquisition_time(2 * m, static_cast<double>(r)), 2.0 * acquisition_time(m, static_cast<double>(r)));
      EXPECT_EQ(acquisition_time(m, 2.0 * r), 0.5 * acquisition_time(m, static_cast<double>(r)));
    }
  }
}

TEST(AcquisitionTime, FromPlan) {
  const auto plan = build_plan(128, SamplingStrategy::spiral(333), PhaseSchedule::three_step, 10'000.0);
  EXPECT_EQ(acquisition_time(plan), 0.0999);
}

}  // namespace
}  // namespace fsi
