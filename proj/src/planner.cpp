#include "polyprune/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

#include "polyprune/error.hpp"
#include "polyprune/rng.hpp"

namespace polyprune {

void RadiusHistory::record(const DiskSet& disks) {
  for (const auto& d : disks.disks) record(d.plant_index, disks.day, d.radius);
}

void RadiusHistory::record(int plant_index, int day, double radius) {
  auto& s = series_[plant_index];
  if (!s.empty() && s.rbegin()->first >= day)
    throw Error(ErrorCode::InvalidInput, "radius history days must be strictly increasing");
  s.emplace(day, radius);
}

std::optional<double> RadiusHistory::radius_at(int plant_index, int day) const {
  const auto it = series_.find(plant_index);
  if (it == series_.end()) return std::nullopt;
  const auto jt = it->second.find(day);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::size_t RadiusHistory::length(int plant_index) const {
  const auto it = series_.find(plant_index);
  return it == series_.end() ? 0 : it->second.size();
}

void PlannerConfig::validate() const {
  if (!(initial_threshold > 0.0 && initial_threshold < 1.0))
    throw Error(ErrorCode::InvalidInput, "initial_threshold must be in (0, 1)");
  if (!(edge_margin >= 0.0)) throw Error(ErrorCode::InvalidInput, "edge_margin must be >= 0");
  if (renorm_rounds < 1) throw Error(ErrorCode::InvalidInput, "renorm_rounds must be >= 1");
  if (decay_window_days < 1) throw Error(ErrorCode::InvalidInput, "decay window must be >= 1");
}

std::vector<int> select_plants_to_prune(const CoverageReport& report, const DiskSet& disks,
                                        const PlantTypeCatalog& catalog, const PlannerConfig& cfg) {
  const auto& v = report.normalized_vector;
  if (static_cast<int>(v.size()) != catalog.type_count())
    throw Error(ErrorCode::CatalogMismatch, "coverage report does not match catalog");
  double sum = 0.0;
  int present = 0;
  for (double x : v) {
    if (x > 0.0) {
      sum += x;
      ++present;
    }
  }
  std::vector<int> selected;
  if (present == 0) return selected;
  const double mean = sum / present;

  for (const auto& d : disks.disks) {
    const double vi = v[static_cast<std::size_t>(catalog.at(d.type_id).type_id - 1)];
    if (!(vi > cfg.dominance_factor * mean) || d.radius <= 0.0) continue;
    const bool crowds = std::any_of(disks.disks.begin(), disks.disks.end(), [&](const BoundingDisk& o) {
      return o.plant_index != d.plant_index && o.type_id != d.type_id && o.radius > 0.0 &&
             o.radius < d.radius && distance(o.center, d.center) < o.radius + d.radius;
    });
    if (crowds) selected.push_back(d.plant_index);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

namespace {

struct Peak {
  int x, y;
  double value;
};

// Peaks of the 8-connected components of pixels >= threshold.
std::vector<Peak> component_peaks(const GrayImage& img, double threshold) {
  const int w = img.width(), h = img.height();
  Grid<std::uint8_t> visited(h, w, 0);
  std::vector<Peak> peaks;
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (visited(x, y) || img(x, y) < threshold) continue;
      Peak best{x, y, img(x, y)};
      visited(x, y) = 1;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        const double val = img(cx, cy);
        if (val > best.value || (val == best.value && std::tie(cy, cx) < std::tie(best.y, best.x)))
          best = {cx, cy, val};
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (!img.contains(nx, ny) || visited(nx, ny) || img(nx, ny) < threshold) continue;
            visited(nx, ny) = 1;
            queue.emplace_back(nx, ny);
          }
        }
      }
      peaks.push_back(best);
    }
  }
  return peaks;
}

}  // namespace

std::vector<PrunePointCandidate> extract_prune_points(const PruneHeatmap& heatmap, const SegmentationMask& mask,
                                                      const DiskSet& disks, const PlannerConfig& cfg) {
  cfg.validate();
  const GrayImage& raw = heatmap.values;
  if (raw.empty()) return {};
  if (std::abs(raw.width() / heatmap.px_per_cm - mask.width() / mask.px_per_cm) > 1.0 / mask.px_per_cm ||
      std::abs(raw.height() / heatmap.px_per_cm - mask.height() / mask.px_per_cm) > 1.0 / mask.px_per_cm)
    throw Error(ErrorCode::ShapeMismatch, "heatmap and mask cover different areas");

  float top = 0.0f;
  for (float v : raw.values()) top = std::max(top, v);
  if (!(top > 0.0f)) return {};

  GrayImage work = raw;
  for (float& v : work.values()) v = std::max(0.0f, v / top);

  const double ppc = heatmap.px_per_cm;
  std::vector<PrunePointCandidate> found;
  for (int round = 1; round <= cfg.renorm_rounds; ++round) {
    float peak = 0.0f;
    for (float v : work.values()) peak = std::max(peak, v);
    if (!(peak > 0.0f) || peak < cfg.min_confidence) break;

    GrayImage norm = work;
    for (float& v : norm.values()) v /= peak;
    auto peaks = component_peaks(norm, cfg.initial_threshold);
    if (peaks.empty()) break;
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });

    std::vector<Peak> accepted;
    for (const auto& p : peaks) {
      const Vec2 pos = pixel_center_cm(p.x, p.y, ppc);
      const double conf = work(p.x, p.y);
      if (conf < cfg.min_confidence) continue;
      const bool crowded = std::any_of(found.begin(), found.end(), [&](const PrunePointCandidate& c) {
        return distance(c.position, pos) < cfg.edge_margin;
      });
      if (crowded) continue;
      found.push_back({pos, -1, conf, round});
      accepted.push_back(p);
    }
    // Remove an exclusion disk around every peak of this round, kept or not,
    // so rejected peaks cannot resurface after renormalization.
    for (const auto& p : peaks) {
      const Vec2 c = pixel_center_cm(p.x, p.y, ppc);
      const int x0 = std::max(0, cm_to_pixel(c.x - cfg.edge_margin, ppc));
      const int x1 = std::min(work.width() - 1, cm_to_pixel(c.x + cfg.edge_margin, ppc));
      const int y0 = std::max(0, cm_to_pixel(c.y - cfg.edge_margin, ppc));
      const int y1 = std::min(work.height() - 1, cm_to_pixel(c.y + cfg.edge_margin, ppc));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
          if (distance(pixel_center_cm(x, y, ppc), c) <= cfg.edge_margin) work(x, y) = 0.0f;
      work(p.x, p.y) = 0.0f;
    }
  }

  std::vector<PrunePointCandidate> out;
  for (auto c : found) {
    const int label = mask.label_at(c.position);
    if (label <= 0) continue;
    const BoundingDisk* owner = nullptr;
    for (const auto& d : disks.disks) {
      if (d.radius <= 0.0 || distance(d.center, c.position) > d.radius) continue;
      if (!owner || d.radius < owner->radius) owner = &d;
    }
    if (!owner || owner->type_id != label) continue;
    c.plant_index = owner->plant_index;
    out.push_back(c);
  }
  return out;
}

Vec2 baseline_prune_point(const SegmentationMask& mask, const BoundingDisk& disk) {
  const double ppc = mask.px_per_cm;
  const double reach = disk.radius + 0.5 / ppc;
  const int x0 = std::max(0, cm_to_pixel(disk.center.x - reach, ppc));
  const int x1 = std::min(mask.width() - 1, cm_to_pixel(disk.center.x + reach, ppc));
  const int y0 = std::max(0, cm_to_pixel(disk.center.y - reach, ppc));
  const int y1 = std::min(mask.height() - 1, cm_to_pixel(disk.center.y + reach, ppc));
  std::optional<Vec2> extremum;
  double far = -1.0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (mask.labels(x, y) != disk.type_id) continue;
      const Vec2 p = pixel_center_cm(x, y, ppc);
      const double d = distance(p, disk.center);
      if (d > reach) continue;
      if (d > far) {
        far = d;
        extremum = p;
      }
    }
  }
  if (!extremum)
    throw Error(ErrorCode::NoPrunePoint, "plant " + std::to_string(disk.plant_index) + " has no pixels");
  Vec2 tip = disk.center;
  if (far > 0.0) tip = disk.center + (disk.radius / far) * (*extremum - disk.center);
  return (1.0 / 3.0) * (*extremum + tip + disk.center);
}

namespace {

// Total order for candidate ties: higher confidence, then lower x, then lower y.
bool tie_before(const PrunePointCandidate& a, const PrunePointCandidate& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.position.x != b.position.x) return a.position.x < b.position.x;
  return a.position.y < b.position.y;
}

}  // namespace

PruneSelection select_prune_point(std::span<const PrunePointCandidate> candidates, const DiskSet& disks,
                                  const RadiusHistory& history, int target, const PlannerConfig& cfg) {
  const BoundingDisk& self = disks.disk(target);
  std::vector<PrunePointCandidate> usable;
  for (const auto& c : candidates) {
    if (c.plant_index != target) continue;
    if (self.radius - distance(c.position, self.center) >= cfg.edge_margin) usable.push_back(c);
  }
  if (usable.empty())
    throw Error(ErrorCode::NoPrunePoint, "no candidate clears the edge margin on plant " + std::to_string(target));

  std::optional<int> neighbor;
  double best_decay = 0.0;
  const int now = disks.day;
  for (const auto& o : disks.disks) {
    if (o.plant_index == target || o.radius <= 0.0) continue;
    const double gap = distance(o.center, self.center) - o.radius - self.radius;
    if (!(gap < cfg.neighbor_gap)) continue;
    const auto r_now = history.radius_at(o.plant_index, now);
    const auto r_then = history.radius_at(o.plant_index, now - cfg.decay_window_days);
    if (!r_now || !r_then)
      throw Error(ErrorCode::InsufficientHistory,
                  "plant " + std::to_string(o.plant_index) + " lacks radii for the decay window");
    const double decay = (*r_then - *r_now) / cfg.decay_window_days;
    if (!neighbor || decay > best_decay) {
      neighbor = o.plant_index;
      best_decay = decay;
    }
  }

  PruneSelection sel;
  if (neighbor) {
    const Vec2 goal = disks.disk(*neighbor).center;
    sel.point = *std::min_element(usable.begin(), usable.end(), [&](const auto& a, const auto& b) {
      const double da = distance(a.position, goal), db = distance(b.position, goal);
      if (da != db) return da < db;
      return tie_before(a, b);
    });
    sel.neighbor = neighbor;
    sel.decay_rate = best_decay;
  } else {
    sel.point = *std::min_element(usable.begin(), usable.end(), [&](const auto& a, const auto& b) {
      const double da = distance(a.position, self.center), db = distance(b.position, self.center);
      if (da != db) return da < db;
      return tie_before(a, b);
    });
  }
  return sel;
}

void add_heatmap_bump(PruneHeatmap& heatmap, Vec2 center_cm, double peak, double sigma_cm) {
  const double ppc = heatmap.px_per_cm;
  const double reach = 4.0 * sigma_cm;
  auto& img = heatmap.values;
  const int x0 = std::max(0, cm_to_pixel(center_cm.x - reach, ppc));
  const int x1 = std::min(img.width() - 1, cm_to_pixel(center_cm.x + reach, ppc));
  const int y0 = std::max(0, cm_to_pixel(center_cm.y - reach, ppc));
  const int y1 = std::min(img.height() - 1, cm_to_pixel(center_cm.y + reach, ppc));
  const double inv = 1.0 / (2.0 * sigma_cm * sigma_cm);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d2 = distance_sq(pixel_center_cm(x, y, ppc), center_cm);
      const auto v = static_cast<float>(peak * std::exp(-d2 * inv));
      img(x, y) = std::max(img(x, y), v);
    }
  }
}

PruneHeatmap synthesize_heatmap(const RenderedGarden& rendered, const GardenState& state, std::uint64_t seed,
                                const HeatmapSynthesis& opts) {
  const double ppc = rendered.mask.px_per_cm;
  PruneHeatmap heat{GrayImage(rendered.mask.height(), rendered.mask.width(), 0.0f), ppc, state.day};
  for (const auto& plant : state.plants) {
    if (plant.radius < opts.min_plant_radius_cm) continue;
    const auto k = static_cast<std::uint64_t>(plant.plant_index);
    for (int ring = 0; ring < 2; ++ring) {
      const double frac = ring == 0 ? 0.35 : 0.7;
      const double rr = frac * plant.radius;
      const int count = std::max(1, static_cast<int>(2.0 * kPi * rr / opts.leaf_spacing_cm));
      const double phase = 2.0 * kPi * hash_unit(seed, k, 1000 + ring);
      for (int j = 0; j < count; ++j) {
        const double theta = phase + 2.0 * kPi * j / count;
        const Vec2 leaf = plant.center + rr * Vec2{std::cos(theta), std::sin(theta)};
        const int px = cm_to_pixel(leaf.x, ppc), py = cm_to_pixel(leaf.y, ppc);
        if (!rendered.owner.contains(px, py) || rendered.owner(px, py) != plant.plant_index) continue;
        const double conf = opts.min_leaf_confidence +
                            (1.0 - opts.min_leaf_confidence) *
                                hash_unit(seed ^ 0xA5A5A5A5ULL, k, static_cast<std::uint64_t>(ring * 1000 + j));
        add_heatmap_bump(heat, leaf, conf, opts.bump_sigma_cm);
      }
    }
  }
  return heat;
}

}  // namespace polyprune
