#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polyprune/error.hpp"
#include "polyprune/geometry.hpp"

namespace polyprune {

// Dense row-major 2-D array. Row index is y, column index is x.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{})
      : height_(height), width_(width), data_(checked_size(height, width), fill) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  bool same_shape(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  static std::size_t checked_size(int height, int width) {
    if (height < 0 || width < 0) throw Error(ErrorCode::InvalidInput, "negative grid dimension");
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

// Dense H x W x C array, channel-innermost (matches the on-disk likelihood layout).
template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(int height, int width, int channels, T fill = T{})
      : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || channels < 0)
      throw Error(ErrorCode::InvalidInput, "negative grid dimension");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }

  T& operator()(int x, int y, int c) { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<T> pixel(int x, int y) {
    return std::span<T>(data_).subspan(index(x, y, 0), channels_);
  }
  std::span<const T> pixel(int x, int y) const {
    return std::span<const T>(data_).subspan(index(x, y, 0), channels_);
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool same_shape(const Grid3& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

// Conversions between pixel indices and bed coordinates. A pixel (x, y) covers
// [x, x+1) / px_per_cm and is represented by its center.
inline Vec2 pixel_center_cm(int x, int y, double px_per_cm) {
  return {(x + 0.5) / px_per_cm, (y + 0.5) / px_per_cm};
}

inline int cm_to_pixel(double cm, double px_per_cm) {
  return static_cast<int>(std::floor(cm * px_per_cm));
}

using GrayImage = Grid<float>;

}  // namespace polyprune
