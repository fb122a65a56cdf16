#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pedrecon/error.hpp"

namespace pedrecon {

/// Row-major image buffer addressed as (u, v) = (column, row).
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    require(width >= 0 && height >= 0, "raster dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int u, int v) const noexcept { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  T& operator()(int u, int v) { return data_[index(u, v)]; }
  const T& operator()(int u, int v) const { return data_[index(u, v)]; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  const std::vector<T>& values() const noexcept { return data_; }
  std::vector<T>& values() noexcept { return data_; }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Decoded disparity in pixels; 0 marks an invalid measurement.
using DisparityMap = Raster<double>;

/// Per-pixel semantic class ids.
using SegmentationMask = Raster<std::uint8_t>;

/// Binary raster, nonzero = set.
using BinaryMask = Raster<std::uint8_t>;

/// Disparities at or below this value carry no usable depth.
inline constexpr double kMinDisparity = 0.25;

// 16-bit disparity encoding: raw 0 is invalid, otherwise d = (raw - 1) / 256.
inline double decode_disparity(std::uint16_t raw) noexcept {
  return raw == 0 ? 0.0 : (static_cast<double>(raw) - 1.0) / 256.0;
}

inline std::uint16_t encode_disparity(double d) noexcept {
  if (!(d > 0.0)) return 0;
  const double raw = std::round(d * 256.0) + 1.0;
  return raw >= 65535.0 ? std::uint16_t{65535} : static_cast<std::uint16_t>(raw);
}

/// Round-trips every pixel through the 16-bit encoding.
inline DisparityMap quantize(const DisparityMap& map) {
  DisparityMap out(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) out.data()[i] = decode_disparity(encode_disparity(map.data()[i]));
  return out;
}

}  // namespace pedrecon
