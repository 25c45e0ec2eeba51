#include "polyprune/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "polyprune/enclosing_disk.hpp"
#include "polyprune/error.hpp"

namespace polyprune {

const char* to_string(TrackerKind kind) {
  return kind == TrackerKind::Bfs ? "bfs" : "kmeans";
}

const BoundingDisk& DiskSet::disk(int plant_index) const {
  if (plant_index < 0 || plant_index >= static_cast<int>(disks.size()) ||
      disks[static_cast<std::size_t>(plant_index)].plant_index != plant_index)
    throw Error(ErrorCode::MissingDisk, "no disk for plant " + std::to_string(plant_index));
  return disks[static_cast<std::size_t>(plant_index)];
}

void TrackerConfig::validate() const {
  if (!(accept_fraction > 0.0 && accept_fraction < 1.0))
    throw Error(ErrorCode::InvalidInput, "accept_fraction must be in (0, 1)");
  if (!(ring_width_px > 0.0)) throw Error(ErrorCode::InvalidInput, "ring width must be positive");
  if (kmeans_max_iters < 1) throw Error(ErrorCode::InvalidInput, "kmeans_max_iters < 1");
}

DiskSet initial_disks(const GardenState& state) {
  DiskSet set{state.day, {}};
  for (const auto& p : state.plants) {
    set.disks.push_back({p.plant_index, p.type_id, p.center, 0.0, TrackerKind::Bfs});
  }
  return set;
}

namespace {

void check_prev(const DiskSet& prev, const GardenState& state) {
  for (const auto& p : state.plants) {
    const auto& d = prev.disk(p.plant_index);
    if (d.type_id != p.type_id)
      throw Error(ErrorCode::MissingDisk, "disk type mismatch for plant " + std::to_string(p.plant_index));
  }
}

struct PixelWindow {
  int x0, x1, y0, y1;
};

PixelWindow window_around(const SegmentationMask& mask, Vec2 c, double reach) {
  const double ppc = mask.px_per_cm;
  return {std::max(0, cm_to_pixel(c.x - reach, ppc)), std::min(mask.width() - 1, cm_to_pixel(c.x + reach, ppc)),
          std::max(0, cm_to_pixel(c.y - reach, ppc)), std::min(mask.height() - 1, cm_to_pixel(c.y + reach, ppc))};
}

BoundingDisk bfs_one(const SegmentationMask& mask, const BoundingDisk& prev, const PlantTypeParams& params,
                     const TrackerConfig& cfg) {
  const double ppc = mask.px_per_cm;
  const double min_r = std::max(0.0, prev.radius - params.wilting_rate);
  const double max_r = std::min(params.max_radius, prev.radius + params.growth_per_day());
  const double ring = cfg.ring_width_px / ppc;
  const int ring_count = std::max(0, static_cast<int>(std::ceil((max_r - min_r) / ring - 1e-12)));

  std::vector<int> seen(static_cast<std::size_t>(ring_count), 0);
  std::vector<int> hits(static_cast<std::size_t>(ring_count), 0);
  const auto win = window_around(mask, prev.center, min_r + ring_count * ring);
  for (int y = win.y0; y <= win.y1; ++y) {
    for (int x = win.x0; x <= win.x1; ++x) {
      const double d = distance(pixel_center_cm(x, y, ppc), prev.center);
      if (d < min_r) continue;
      const auto j = static_cast<int>(std::floor((d - min_r) / ring));
      if (j >= ring_count) continue;
      ++seen[static_cast<std::size_t>(j)];
      if (mask.labels(x, y) == params.type_id) ++hits[static_cast<std::size_t>(j)];
    }
  }

  double radius = min_r;
  bool accepted_any = false;
  for (int j = 0; j < ring_count; ++j) {
    const int n = seen[static_cast<std::size_t>(j)];
    if (n == 0) continue;
    if (hits[static_cast<std::size_t>(j)] < cfg.accept_fraction * n) break;
    radius = min_r + (j + 1) * ring;
    accepted_any = true;
  }
  radius = std::clamp(radius, min_r, max_r);

  BoundingDisk out = prev;
  out.radius = radius;
  out.tracker = TrackerKind::Bfs;
  if (cfg.recenter && accepted_any && radius > 0.0) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    const auto w = window_around(mask, prev.center, radius);
    for (int y = w.y0; y <= w.y1; ++y) {
      for (int x = w.x0; x <= w.x1; ++x) {
        if (mask.labels(x, y) != params.type_id) continue;
        const Vec2 p = pixel_center_cm(x, y, ppc);
        if (distance(p, prev.center) > radius) continue;
        sx += p.x;
        sy += p.y;
        ++n;
      }
    }
    if (n > 0) out.center = {sx / static_cast<double>(n), sy / static_cast<double>(n)};
  }
  return out;
}

}  // namespace

DiskSet bfs_track(const SegmentationMask& mask, const DiskSet& prev, const GardenState& state,
                  const PlantTypeCatalog& catalog, const TrackerConfig& cfg) {
  cfg.validate();
  check_prev(prev, state);
  DiskSet out{state.day, {}};
  out.disks.reserve(state.plants.size());
  for (const auto& p : state.plants) {
    out.disks.push_back(bfs_one(mask, prev.disk(p.plant_index), catalog.at(p.type_id), cfg));
  }
  return out;
}

DiskSet kmeans_track(const SegmentationMask& mask, const GardenState& state, const TrackerConfig& cfg,
                     std::vector<int>* underpopulated) {
  cfg.validate();
  const double ppc = mask.px_per_cm;
  DiskSet out = initial_disks(state);
  out.day = state.day;
  for (auto& d : out.disks) d.tracker = TrackerKind::KMeans;

  int max_type = 0;
  for (const auto& p : state.plants) max_type = std::max(max_type, p.type_id);
  std::vector<std::vector<Vec2>> pixels(static_cast<std::size_t>(max_type) + 1);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const int label = mask.labels(x, y);
      if (label > 0 && label <= max_type) pixels[static_cast<std::size_t>(label)].push_back(pixel_center_cm(x, y, ppc));
    }
  }

  for (int type = 1; type <= max_type; ++type) {
    std::vector<int> members;
    for (const auto& p : state.plants)
      if (p.type_id == type) members.push_back(p.plant_index);
    if (members.empty()) continue;
    const auto& pts = pixels[static_cast<std::size_t>(type)];
    const std::size_t k = members.size();
    if (pts.size() < k) {
      if (underpopulated) underpopulated->insert(underpopulated->end(), members.begin(), members.end());
      continue;
    }

    std::vector<Vec2> centroids;
    for (int idx : members) centroids.push_back(state.plant(idx).center);
    std::vector<std::size_t> assign(pts.size(), 0);

    for (int iter = 0; iter < cfg.kmeans_max_iters; ++iter) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        std::size_t best = 0;
        double best_d = distance_sq(pts[i], centroids[0]);
        for (std::size_t c = 1; c < k; ++c) {
          const double d = distance_sq(pts[i], centroids[c]);
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        assign[i] = best;
      }
      std::vector<Vec2> sums(k, Vec2{});
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        sums[assign[i]] = sums[assign[i]] + pts[i];
        ++counts[assign[i]];
      }
      std::vector<Vec2> next(k);
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) next[c] = (1.0 / static_cast<double>(counts[c])) * sums[c];
      }
      std::vector<bool> placed(k);
      for (std::size_t c = 0; c < k; ++c) placed[c] = counts[c] > 0;
      for (std::size_t c = 0; c < k; ++c) {
        if (placed[c]) continue;
        // Empty cluster: reseed at the same-type pixel farthest from every placed centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          double nearest = std::numeric_limits<double>::infinity();
          for (std::size_t o = 0; o < k; ++o)
            if (placed[o]) nearest = std::min(nearest, distance_sq(pts[i], next[o]));
          if (nearest > far_d) {
            far_d = nearest;
            far = i;
          }
        }
        next[c] = pts[far];
        placed[c] = true;
      }
      double moved = 0.0;
      for (std::size_t c = 0; c < k; ++c) moved = std::max(moved, distance(next[c], centroids[c]));
      centroids = std::move(next);
      if (moved < cfg.kmeans_tolerance) break;
    }
    // Reassignment with distances scaled by each cluster's area-equivalent radius.
    std::vector<double> scale(k, 1.0);
    auto nearest = [&](Vec2 p) {
      std::size_t best = 0;
      double best_d = distance_sq(p, centroids[0]) / scale[0];
      for (std::size_t c = 1; c < k; ++c) {
        const double d = distance_sq(p, centroids[c]) / scale[c];
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      return best;
    };
    if (cfg.kmeans_scale_refine && k > 1) {
      for (std::size_t i = 0; i < pts.size(); ++i) assign[i] = nearest(pts[i]);
      for (int iter = 0; iter < cfg.kmeans_max_iters; ++iter) {
        std::vector<Vec2> sums(k, Vec2{});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
          sums[assign[i]] = sums[assign[i]] + pts[i];
          ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
          if (counts[c] == 0) continue;
          centroids[c] = (1.0 / static_cast<double>(counts[c])) * sums[c];
          const double r = std::max(0.5 / ppc, std::sqrt(static_cast<double>(counts[c]) / kPi) / ppc);
          scale[c] = r * r;
        }
        bool changed = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          const std::size_t a = nearest(pts[i]);
          changed = changed || a != assign[i];
          assign[i] = a;
        }
        if (!changed) break;
      }
    }
    std::vector<std::vector<Vec2>> clusters(k);
    for (const auto& p : pts) clusters[nearest(p)].push_back(p);

    // Greedy nearest-seed matching of clusters to plants.
    std::vector<std::tuple<double, int, std::size_t>> pairs;
    for (std::size_t c = 0; c < k; ++c) {
      for (int idx : members) pairs.emplace_back(distance(centroids[c], state.plant(idx).center), idx, c);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> cluster_used(k, false);
    std::vector<int> plant_done;
    for (const auto& [d, idx, c] : pairs) {
      if (cluster_used[c] || std::find(plant_done.begin(), plant_done.end(), idx) != plant_done.end()) continue;
      cluster_used[c] = true;
      plant_done.push_back(idx);
      auto& disk = out.disks[static_cast<std::size_t>(idx)];
      if (clusters[c].empty()) {
        disk.center = centroids[c];
        disk.radius = 0.0;
      } else {
        const Circle circ = smallest_enclosing_disk(clusters[c]);
        disk.center = circ.center;
        disk.radius = circ.radius;
      }
    }
  }
  return out;
}

double occlusion_estimate(const SegmentationMask& mask, const DiskSet& prev, const GardenState& state,
                          int type_id) {
  double expected_px = 0.0;
  for (const auto& p : state.plants) {
    if (p.type_id != type_id) continue;
    const double r = prev.disk(p.plant_index).radius;
    expected_px += kPi * r * r * mask.px_per_cm * mask.px_per_cm;
  }
  if (!(expected_px > 0.0)) return 0.0;
  std::size_t count = 0;
  for (std::uint8_t label : mask.labels.values())
    if (label == type_id) ++count;
  return std::clamp(1.0 - static_cast<double>(count) / expected_px, 0.0, 1.0);
}

std::vector<bool> mixed_selection(const SegmentationMask& mask, const DiskSet& prev, const GardenState& state,
                                  const PlantTypeCatalog& catalog, const TrackerConfig& cfg) {
  std::vector<double> occlusion(static_cast<std::size_t>(catalog.type_count()) + 1, -1.0);
  std::vector<bool> use_kmeans;
  for (const auto& p : state.plants) {
    auto& occ = occlusion[static_cast<std::size_t>(p.type_id)];
    if (occ < 0.0) occ = occlusion_estimate(mask, prev, state, p.type_id);
    use_kmeans.push_back(catalog.at(p.type_id).max_radius >= cfg.mixed_size_threshold &&
                         occ < cfg.mixed_occlusion_limit);
  }
  return use_kmeans;
}

DiskSet mixed_track(const SegmentationMask& mask, const DiskSet& prev, const GardenState& state,
                    const PlantTypeCatalog& catalog, const TrackerConfig& cfg) {
  const auto select = mixed_selection(mask, prev, state, catalog, cfg);
  DiskSet out = bfs_track(mask, prev, state, catalog, cfg);
  if (std::find(select.begin(), select.end(), true) == select.end()) return out;
  const DiskSet km = kmeans_track(mask, state, cfg);
  for (std::size_t k = 0; k < select.size(); ++k) {
    if (select[k]) out.disks[k] = km.disks[k];
  }
  return out;
}

namespace {

struct CoverageCounts {
  std::size_t in_union = 0;       // P_c
  std::size_t type_in_union = 0;  // P_i
  std::size_t type_total = 0;     // P_t
};

CoverageCounts count_coverage(const DiskSet& disks, const SegmentationMask& mask, int type_id) {
  std::vector<Circle> circles;
  for (const auto& d : disks.disks)
    if (d.type_id == type_id && d.radius > 0.0) circles.push_back(d.circle());
  CoverageCounts counts;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const bool typed = mask.labels(x, y) == type_id;
      counts.type_total += typed;
      const Vec2 p = pixel_center_cm(x, y, mask.px_per_cm);
      const bool covered = std::any_of(circles.begin(), circles.end(), [&](const Circle& c) {
        return distance_sq(p, c.center) <= c.radius * c.radius;
      });
      if (covered) {
        ++counts.in_union;
        counts.type_in_union += typed;
      }
    }
  }
  return counts;
}

}  // namespace

double acu(const DiskSet& disks, const SegmentationMask& mask, int type_id) {
  const auto c = count_coverage(disks, mask, type_id);
  return c.in_union == 0 ? 0.0 : static_cast<double>(c.type_in_union) / static_cast<double>(c.in_union);
}

double ppi(const DiskSet& disks, const SegmentationMask& mask, int type_id) {
  const auto c = count_coverage(disks, mask, type_id);
  return c.type_total == 0 ? 1.0 : static_cast<double>(c.type_in_union) / static_cast<double>(c.type_total);
}

double lens_area(const Circle& a, const Circle& b) {
  const double r1 = a.radius, r2 = b.radius;
  const double d = distance(a.center, b.center);
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) {
    const double r = std::min(r1, r2);
    return kPi * r * r;
  }
  const double c1 = std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0);
  const double c2 = std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0);
  const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
  return r1 * r1 * std::acos(c1) + r2 * r2 * std::acos(c2) - 0.5 * std::sqrt(std::max(0.0, k));
}

double circle_iou(const Circle& a, const Circle& b) {
  if (a.radius < 0.0 || b.radius < 0.0) throw Error(ErrorCode::InvalidInput, "negative radius");
  if (a.radius == 0.0 && b.radius == 0.0) return a.center == b.center ? 1.0 : 0.0;
  const double inter = lens_area(a, b);
  const double uni = kPi * (a.radius * a.radius + b.radius * b.radius) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace polyprune
