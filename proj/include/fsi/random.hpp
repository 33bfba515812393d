#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al., SC'11).
//
// A draw is a pure function of (key, counter), so any measurement's noise can
// be regenerated without replaying the stream that precedes it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace fsi {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) : key_(key) {}

  constexpr Counter operator()(Counter ctr) const {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, k);
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  static constexpr std::pair<std::uint32_t, std::uint32_t> mulhilo(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    return {static_cast<std::uint32_t>(p >> 32), static_cast<std::uint32_t>(p)};
  }

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const auto [hi0, lo0] = mulhilo(0xD2511F53u, c[0]);
    const auto [hi1, lo1] = mulhilo(0xCD9E8D57u, c[2]);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  Key key_;
};

/// Standard normal variates addressed by (seed, stream, index).
class GaussianStream {
 public:
  constexpr GaussianStream(std::uint64_t seed, std::uint64_t stream)
      : gen_({static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}),
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  /// Two independent N(0, 1) draws for block `block` (Box-Muller on one Philox output).
  std::pair<double, double> pair(std::uint64_t block) const {
    const auto r = gen_({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), stream_lo_,
                         stream_hi_});
    // 53-bit uniforms; u1 in (0, 1] keeps the logarithm finite.
    const double u1 = (static_cast<double>(combine(r[0], r[1]) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(combine(r[2], r[3]) >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double operator[](std::uint64_t index) const {
    const auto p = pair(index / 2);
    return index % 2 == 0 ? p.first : p.second;
  }

 private:
  static constexpr std::uint64_t combine(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  Philox4x32 gen_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
};

}  // namespace fsi
