#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "polyprune/garden.hpp"
#include "polyprune/geometry.hpp"
#include "polyprune/grid.hpp"
#include "polyprune/mask.hpp"
#include "polyprune/tracking.hpp"

namespace polyprune {

// Leaf-center likelihood over the overhead image.
struct PruneHeatmap {
  GrayImage values;
  double px_per_cm = 1.0;
  int day = 0;
};

struct PrunePointCandidate {
  Vec2 position;  // cm, pixel center of the heatmap peak
  int plant_index = -1;
  double confidence = 0.0;  // value in the once-normalized heatmap
  int round = 0;            // 1-based renormalization round that found it
};

// Tracked radii per plant, by day.
class RadiusHistory {
 public:
  void record(const DiskSet& disks);
  void record(int plant_index, int day, double radius);
  std::optional<double> radius_at(int plant_index, int day) const;
  std::size_t length(int plant_index) const;

 private:
  std::map<int, std::map<int, double>> series_;
};

struct PlannerConfig {
  double initial_threshold = 0.3;
  double edge_margin = 3.0;  // cm
  int renorm_rounds = 3;
  double dominance_factor = 1.2;
  double neighbor_gap = 15.0;  // cm
  // Rounds stop once the remaining heatmap peak drops below this fraction of
  // the original maximum; without a floor renormalization promotes noise.
  double min_confidence = 0.1;
  int decay_window_days = 5;

  void validate() const;
};

std::vector<int> select_plants_to_prune(const CoverageReport& report, const DiskSet& disks,
                                        const PlantTypeCatalog& catalog, const PlannerConfig& cfg);

std::vector<PrunePointCandidate> extract_prune_points(const PruneHeatmap& heatmap, const SegmentationMask& mask,
                                                      const DiskSet& disks, const PlannerConfig& cfg);

// Centroid of {farthest plant pixel, disk boundary point in that direction, disk center}.
Vec2 baseline_prune_point(const SegmentationMask& mask, const BoundingDisk& disk);

struct PruneSelection {
  PrunePointCandidate point;
  std::optional<int> neighbor;  // plant index of the relieved neighbor
  double decay_rate = 0.0;      // cm/day, positive = shrinking
};

PruneSelection select_prune_point(std::span<const PrunePointCandidate> candidates, const DiskSet& disks,
                                  const RadiusHistory& history, int target, const PlannerConfig& cfg);

struct HeatmapSynthesis {
  double leaf_spacing_cm = 6.0;
  double bump_sigma_cm = 1.0;
  double min_plant_radius_cm = 2.0;
  double min_leaf_confidence = 0.35;
};

// Gaussian bumps at leaf positions on visible tissue of each plant, standing in
// for the learned leaf-center network.
PruneHeatmap synthesize_heatmap(const RenderedGarden& rendered, const GardenState& state, std::uint64_t seed,
                                const HeatmapSynthesis& opts = {});

// Adds one Gaussian bump (max-composited) to a heatmap.
void add_heatmap_bump(PruneHeatmap& heatmap, Vec2 center_cm, double peak, double sigma_cm);

}  // namespace polyprune
