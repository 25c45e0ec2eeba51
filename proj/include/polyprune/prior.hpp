#pragma once

#include <span>
#include <vector>

#include "polyprune/geometry.hpp"
#include "polyprune/grid.hpp"
#include "polyprune/mask.hpp"

namespace polyprune {

// H x W x (i_total + 1) per-pixel label likelihoods; channel 0 is soil.
using LikelihoodGrid = Grid3<float>;
// Same shape as LikelihoodGrid; 1 outside every plant disk, alpha*(2 - r/R_k) inside.
using OccupancyGrid = Grid3<float>;

struct PriorPlacement {
  Vec2 center;         // cm
  int type_id = 0;     // channel the prior applies to
  double max_radius;   // R_k, cm
};

struct GridShape {
  int height = 0;
  int width = 0;
  int channels = 0;
};

OccupancyGrid build_occupancy_grid(std::span<const PriorPlacement> placements, GridShape shape,
                                   double px_per_cm, double alpha = 5.0);

LikelihoodGrid apply_prior(const LikelihoodGrid& likelihood, const OccupancyGrid& occupancy);

// Per-pixel argmax; exact ties resolve to the lowest channel.
SegmentationMask argmax_label(const LikelihoodGrid& likelihood, double px_per_cm = 1.0);

// Mean over labels 0..i_total of per-label IoU. A label absent from both masks
// counts as 1.
double mean_iou(const SegmentationMask& pred, const SegmentationMask& truth, int i_total);
std::vector<double> per_label_iou(const SegmentationMask& pred, const SegmentationMask& truth,
                                  int i_total);

}  // namespace polyprune
