#pragma once

#include <string>
#include <vector>

#include "polyprune/garden.hpp"
#include "polyprune/geometry.hpp"
#include "polyprune/mask.hpp"

namespace polyprune {

enum class TrackerKind { Bfs, KMeans };

const char* to_string(TrackerKind kind);

struct BoundingDisk {
  int plant_index = 0;
  int type_id = 0;
  Vec2 center;  // cm
  double radius = 0.0;
  TrackerKind tracker = TrackerKind::Bfs;

  Circle circle() const { return {center, radius}; }
};

struct DiskSet {
  int day = 0;
  std::vector<BoundingDisk> disks;  // disks[k].plant_index == k

  const BoundingDisk& disk(int plant_index) const;
};

struct TrackerConfig {
  double ring_width_px = 1.0;
  double accept_fraction = 0.10;
  int kmeans_max_iters = 50;
  double kmeans_tolerance = 0.01;       // cm
  bool kmeans_scale_refine = true;      // radius-scaled reassignment after Lloyd
  double mixed_size_threshold = 25.0;   // cm, compared against R_i
  double mixed_occlusion_limit = 0.4;
  bool recenter = true;

  void validate() const;
};

// Day-0 tracker state: every plant at its seed location with radius 0.
DiskSet initial_disks(const GardenState& state);

DiskSet bfs_track(const SegmentationMask& mask, const DiskSet& prev, const GardenState& state,
                  const PlantTypeCatalog& catalog, const TrackerConfig& cfg);

// Plants that K-Means could not place (too few pixels of their type) are
// listed in `underpopulated` when the pointer is given.
DiskSet kmeans_track(const SegmentationMask& mask, const GardenState& state,
                     const TrackerConfig& cfg, std::vector<int>* underpopulated = nullptr);

// Fraction of the expected disk area (sum of pi r^2 over prev disks of the
// type) that is missing from the mask, clamped to [0, 1]; 0 when nothing is
// expected yet.
double occlusion_estimate(const SegmentationMask& mask, const DiskSet& prev, const GardenState& state,
                          int type_id);

// Per-plant selector used by mixed_track: true selects the K-Means result.
std::vector<bool> mixed_selection(const SegmentationMask& mask, const DiskSet& prev,
                                  const GardenState& state, const PlantTypeCatalog& catalog,
                                  const TrackerConfig& cfg);

DiskSet mixed_track(const SegmentationMask& mask, const DiskSet& prev, const GardenState& state,
                    const PlantTypeCatalog& catalog, const TrackerConfig& cfg);

// P_i / P_c over the union of the type's disks; 0 when the union is empty.
double acu(const DiskSet& disks, const SegmentationMask& mask, int type_id);
// P_i / P_t; 1 when the type has no pixels.
double ppi(const DiskSet& disks, const SegmentationMask& mask, int type_id);

double circle_iou(const Circle& a, const Circle& b);
inline double circle_iou(const BoundingDisk& a, const BoundingDisk& b) {
  return circle_iou(a.circle(), b.circle());
}
// Area of the intersection of two disks.
double lens_area(const Circle& a, const Circle& b);

}  // namespace polyprune
