#pragma once

#include <cstdint>

#include "polyprune/grid.hpp"

namespace polyprune {

// Per-pixel plant-type labels; 0 is soil. px_per_cm ties pixels to bed cm.
struct SegmentationMask {
  Grid<std::uint8_t> labels;
  double px_per_cm = 1.0;

  int height() const noexcept { return labels.height(); }
  int width() const noexcept { return labels.width(); }
  std::uint8_t operator()(int x, int y) const { return labels(x, y); }
  std::uint8_t& operator()(int x, int y) { return labels(x, y); }

  // Label of the pixel containing a bed point, or -1 outside the grid.
  int label_at(Vec2 cm) const {
    const int x = cm_to_pixel(cm.x, px_per_cm);
    const int y = cm_to_pixel(cm.y, px_per_cm);
    return labels.contains(x, y) ? labels(x, y) : -1;
  }

  friend bool operator==(const SegmentationMask& a, const SegmentationMask& b) {
    return a.px_per_cm == b.px_per_cm && a.labels == b.labels;
  }
};

}  // namespace polyprune
