#include "polyprune/prior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polyprune/error.hpp"

namespace polyprune {

OccupancyGrid build_occupancy_grid(std::span<const PriorPlacement> placements, GridShape shape,
                                   double px_per_cm, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidInput, "alpha must be positive");
  if (!(px_per_cm > 0.0)) throw Error(ErrorCode::InvalidScale, "px_per_cm must be positive");
  OccupancyGrid grid(shape.height, shape.width, shape.channels, 1.0f);
  // Tracks which (pixel, channel) cells already hold a plant prior so that
  // overlapping same-type disks take the max among priors, not against the 1.
  Grid3<std::uint8_t> touched(shape.height, shape.width, shape.channels, 0);

  const double w_cm = shape.width / px_per_cm;
  const double h_cm = shape.height / px_per_cm;
  for (const auto& pl : placements) {
    if (!(pl.max_radius > 0.0)) throw Error(ErrorCode::InvalidInput, "R_k must be positive");
    if (pl.type_id < 0 || pl.type_id >= shape.channels)
      throw Error(ErrorCode::CatalogMismatch, "placement type " + std::to_string(pl.type_id));
    if (pl.center.x < 0.0 || pl.center.y < 0.0 || pl.center.x >= w_cm || pl.center.y >= h_cm)
      throw Error(ErrorCode::OutOfBounds, "placement center outside grid");

    const int x0 = std::max(0, cm_to_pixel(pl.center.x - pl.max_radius, px_per_cm));
    const int x1 = std::min(shape.width - 1, cm_to_pixel(pl.center.x + pl.max_radius, px_per_cm));
    const int y0 = std::max(0, cm_to_pixel(pl.center.y - pl.max_radius, px_per_cm));
    const int y1 = std::min(shape.height - 1, cm_to_pixel(pl.center.y + pl.max_radius, px_per_cm));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double r = distance(pixel_center_cm(x, y, px_per_cm), pl.center);
        if (r > pl.max_radius) continue;
        const float value = static_cast<float>(alpha * (2.0 - r / pl.max_radius));
        float& cell = grid(x, y, pl.type_id);
        if (!touched(x, y, pl.type_id)) {
          cell = value;
          touched(x, y, pl.type_id) = 1;
        } else {
          cell = std::max(cell, value);
        }
      }
    }
  }
  return grid;
}

LikelihoodGrid apply_prior(const LikelihoodGrid& likelihood, const OccupancyGrid& occupancy) {
  if (!likelihood.same_shape(occupancy))
    throw Error(ErrorCode::ShapeMismatch, "likelihood and occupancy shapes differ");
  LikelihoodGrid fused = likelihood;
  auto out = fused.values();
  auto prior = occupancy.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= prior[i];
  return fused;
}

SegmentationMask argmax_label(const LikelihoodGrid& likelihood, double px_per_cm) {
  if (likelihood.channels() < 1) throw Error(ErrorCode::InvalidInput, "no channels");
  if (likelihood.channels() > 256) throw Error(ErrorCode::InvalidInput, "more than 256 labels");
  SegmentationMask mask{Grid<std::uint8_t>(likelihood.height(), likelihood.width(), 0), px_per_cm};
  for (int y = 0; y < likelihood.height(); ++y) {
    for (int x = 0; x < likelihood.width(); ++x) {
      const auto px = likelihood.pixel(x, y);
      int best = 0;
      for (int c = 1; c < static_cast<int>(px.size()); ++c) {
        if (px[static_cast<std::size_t>(c)] > px[static_cast<std::size_t>(best)]) best = c;
      }
      mask.labels(x, y) = static_cast<std::uint8_t>(best);
    }
  }
  return mask;
}

std::vector<double> per_label_iou(const SegmentationMask& pred, const SegmentationMask& truth,
                                  int i_total) {
  if (!pred.labels.same_shape(truth.labels))
    throw Error(ErrorCode::ShapeMismatch, "prediction and truth shapes differ");
  if (i_total < 0) throw Error(ErrorCode::InvalidInput, "negative label count");
  const auto n = static_cast<std::size_t>(i_total) + 1;
  std::vector<std::size_t> inter(n, 0), uni(n, 0);
  const auto a = pred.labels.values();
  const auto b = truth.labels.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= n || b[i] >= n) throw Error(ErrorCode::CatalogMismatch, "label exceeds i_total");
    if (a[i] == b[i]) {
      ++inter[a[i]];
      ++uni[a[i]];
    } else {
      ++uni[a[i]];
      ++uni[b[i]];
    }
  }
  std::vector<double> iou(n);
  for (std::size_t l = 0; l < n; ++l) {
    iou[l] = uni[l] == 0 ? 1.0 : static_cast<double>(inter[l]) / static_cast<double>(uni[l]);
  }
  return iou;
}

double mean_iou(const SegmentationMask& pred, const SegmentationMask& truth, int i_total) {
  const auto iou = per_label_iou(pred, truth, i_total);
  double sum = 0.0;
  for (double v : iou) sum += v;
  return sum / static_cast<double>(iou.size());
}

}  // namespace polyprune
