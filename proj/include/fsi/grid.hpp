#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsi {

/// Category of a failure, used by the CLI to emit a machine-parsable error line.
enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  consistency,
  format,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {
inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}
}  // namespace detail

/// Dense row-major 2-D grid. x runs along a row (width), y down the columns (height).
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}
  Grid(int width, int height, std::vector<T> values) : width_(width), height_(height), data_(std::move(values)) {
    detail::require(data_.size() == checked_size(width, height), ErrorKind::dimension_mismatch,
                    "grid value count does not match " + std::to_string(width) + "x" + std::to_string(height));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int width, int height) {
    detail::require(width >= 0 && height >= 0, ErrorKind::invalid_argument, "grid dimensions must be non-negative");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Real-valued illumination pattern with values in [0, 1].
using GrayPattern = Grid<double>;
/// 1-bit illumination pattern; every entry is 0 or 1.
using BinaryPattern = Grid<std::uint8_t>;

/// Mean over non-overlapping k x k blocks. Dimensions must be divisible by k.
template <class T>
Grid<double> block_average(const Grid<T>& in, int k) {
  detail::require(k >= 1, ErrorKind::invalid_argument, "block size must be >= 1");
  detail::require(in.width() % k == 0 && in.height() % k == 0, ErrorKind::dimension_mismatch,
                  "grid is not divisible into " + std::to_string(k) + "x" + std::to_string(k) + " blocks");
  Grid<double> out(in.width() / k, in.height() / k);
  const double inv = 1.0 / (static_cast<double>(k) * k);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      double sum = 0.0;
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) sum += static_cast<double>(in(x * k + i, y * k + j));
      out(x, y) = sum * inv;
    }
  }
  return out;
}

/// Each cell becomes a k x k block of the same value.
template <class T>
Grid<T> block_replicate(const Grid<T>& in, int k) {
  detail::require(k >= 1, ErrorKind::invalid_argument, "block size must be >= 1");
  Grid<T> out(in.width() * k, in.height() * k);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = in(x / k, y / k);
  return out;
}

}  // namespace fsi
