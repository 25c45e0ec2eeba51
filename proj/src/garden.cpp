#include "polyprune/garden.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyprune/error.hpp"
#include "polyprune/rng.hpp"

namespace polyprune {

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::Germination: return "germination";
    case Stage::Growth: return "growth";
    case Stage::Waiting: return "waiting";
    case Stage::Wilting: return "wilting";
  }
  return "unknown";
}

Stage PlantTypeParams::stage_at(double day) const {
  if (day < germination_days) return Stage::Germination;
  if (day < maturation_days) return Stage::Growth;
  if (day < wilt_start()) return Stage::Waiting;
  return Stage::Wilting;
}

PlantTypeCatalog::PlantTypeCatalog(std::vector<PlantTypeParams> types) : types_(std::move(types)) {
  if (types_.empty()) throw Error(ErrorCode::InvalidInput, "catalog has no plant types");
  if (types_.size() > 254) throw Error(ErrorCode::InvalidInput, "catalog exceeds 254 types");
  std::sort(types_.begin(), types_.end(),
            [](const auto& a, const auto& b) { return a.type_id < b.type_id; });
  for (std::size_t i = 0; i < types_.size(); ++i) {
    const auto& t = types_[i];
    if (t.type_id != static_cast<int>(i) + 1)
      throw Error(ErrorCode::InvalidInput, "type ids must be unique and contiguous from 1");
    if (!(t.germination_days > 0.0 && t.germination_days < t.maturation_days))
      throw Error(ErrorCode::InvalidInput, "type " + t.name + ": need 0 < g < m");
    if (!(t.max_radius > 0.0)) throw Error(ErrorCode::InvalidInput, "type " + t.name + ": R <= 0");
    if (!(t.wilting_rate >= 0.0))
      throw Error(ErrorCode::InvalidInput, "type " + t.name + ": negative wilting rate");
    if (t.wilt_start() < t.maturation_days)
      throw Error(ErrorCode::InvalidInput, "type " + t.name + ": wilting before maturation");
  }
}

const PlantTypeParams& PlantTypeCatalog::at(int type_id) const {
  if (!contains(type_id))
    throw Error(ErrorCode::CatalogMismatch, "unknown type id " + std::to_string(type_id));
  return types_[static_cast<std::size_t>(type_id - 1)];
}

double PlantTypeCatalog::avg_max_radius() const {
  if (types_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : types_) sum += t.max_radius;
  return sum / static_cast<double>(types_.size());
}

bool operator==(const PlantTypeCatalog& a, const PlantTypeCatalog& b) {
  if (a.types_.size() != b.types_.size()) return false;
  for (std::size_t i = 0; i < a.types_.size(); ++i) {
    const auto& x = a.types_[i];
    const auto& y = b.types_[i];
    if (x.type_id != y.type_id || x.name != y.name || x.germination_days != y.germination_days ||
        x.maturation_days != y.maturation_days || x.max_radius != y.max_radius ||
        x.wilting_rate != y.wilting_rate || x.wilt_start() != y.wilt_start())
      return false;
  }
  return true;
}

PlantTypeCatalog default_catalog() {
  // name, g, m, R
  struct Row {
    const char* name;
    double g, m, r;
  };
  static constexpr Row rows[] = {
      {"kale", 7, 45, 37},         {"turnip", 5, 40, 33},       {"borage", 8, 45, 32},
      {"swiss_chard", 9, 50, 28},  {"arugula", 5, 40, 25},      {"radicchio", 10, 55, 23},
      {"red_lettuce", 8, 50, 20},  {"cilantro", 9, 45, 19},     {"green_lettuce", 8, 50, 16},
      {"sorrel", 10, 55, 10},
  };
  std::vector<PlantTypeParams> types;
  int id = 1;
  for (const auto& row : rows) {
    types.push_back({id++, row.name, row.g, row.m, row.r, 0.5, std::nullopt});
  }
  return PlantTypeCatalog(std::move(types));
}

bool PlantState::covers(Vec2 p) const {
  if (radius <= 0.0 || distance_sq(p, center) > radius * radius) return false;
  for (const auto& w : wounds) {
    if (distance_sq(p, center + w.offset) <= w.radius * w.radius) return false;
  }
  return true;
}

void GardenState::validate(const PlantTypeCatalog& catalog) const {
  if (day < 0) throw Error(ErrorCode::InvalidInput, "negative day");
  for (std::size_t k = 0; k < plants.size(); ++k) {
    const auto& p = plants[k];
    if (p.plant_index != static_cast<int>(k))
      throw Error(ErrorCode::InvalidInput, "plant indices must be 0..n-1 in order");
    const auto& params = catalog.at(p.type_id);
    if (p.radius < 0.0 || p.radius > params.max_radius + 1e-9)
      throw Error(ErrorCode::InvalidInput, "plant " + std::to_string(k) + " radius out of range");
    if (p.center.x < 0.0 || p.center.y < 0.0 || p.center.x > bed_width || p.center.y > bed_height)
      throw Error(ErrorCode::InvalidInput, "plant " + std::to_string(k) + " outside bed");
  }
}

const PlantState& GardenState::plant(int plant_index) const {
  if (plant_index < 0 || plant_index >= static_cast<int>(plants.size()))
    throw Error(ErrorCode::InvalidInput, "no plant " + std::to_string(plant_index));
  return plants[static_cast<std::size_t>(plant_index)];
}

PlantState& GardenState::plant(int plant_index) {
  return const_cast<PlantState&>(std::as_const(*this).plant(plant_index));
}

GardenState advance_day(const GardenState& state, const PlantTypeCatalog& catalog) {
  GardenState next = state;
  const double today = static_cast<double>(state.day);
  for (auto& plant : next.plants) {
    const auto& params = catalog.at(plant.type_id);
    switch (params.stage_at(today)) {
      case Stage::Growth:
        plant.radius = std::min(params.max_radius, plant.radius + params.growth_per_day());
        break;
      case Stage::Wilting:
        plant.radius = std::max(0.0, plant.radius - params.wilting_rate);
        break;
      case Stage::Germination:
      case Stage::Waiting:
        break;
    }
    plant.stage = params.stage_at(today + 1.0);
  }
  next.day = state.day + 1;
  return next;
}

double max_next_radius(const PlantState& plant, const PlantTypeCatalog& catalog) {
  const auto& params = catalog.at(plant.type_id);
  return std::min(params.max_radius, plant.radius + params.growth_per_day());
}

namespace {

// Radial boundary perturbation: a few low harmonics with seeded phases.
struct Jitter {
  double amplitude = 0.0;
  double phase[3] = {0.0, 0.0, 0.0};

  double at(double theta) const {
    if (amplitude == 0.0) return 0.0;
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += std::sin((k + 3) * theta + phase[k]);
    return amplitude * s / 3.0;
  }
};

}  // namespace

RenderedGarden render_garden(const GardenState& state, double px_per_cm, std::uint64_t seed,
                             const RenderOptions& options) {
  if (!(px_per_cm > 0.0)) throw Error(ErrorCode::InvalidScale, "px_per_cm must be positive");
  const int width = static_cast<int>(std::lround(state.bed_width * px_per_cm));
  const int height = static_cast<int>(std::lround(state.bed_height * px_per_cm));
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidScale, "zero-area render grid");

  RenderedGarden out{{Grid<std::uint8_t>(height, width, 0), px_per_cm},
                     Grid<std::int32_t>(height, width, -1)};

  // Paint bottom-up so the last writer is on top: smaller radius first, and
  // among equal radii the higher index first so the lower index ends on top.
  std::vector<std::size_t> order(state.plants.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = state.plants[a];
    const auto& pb = state.plants[b];
    if (pa.radius != pb.radius) return pa.radius < pb.radius;
    return pa.plant_index > pb.plant_index;
  });

  for (std::size_t idx : order) {
    const auto& plant = state.plants[idx];
    if (plant.radius <= 0.0) continue;
    Jitter jitter;
    jitter.amplitude = options.jitter_cm;
    if (jitter.amplitude != 0.0) {
      Rng rng(hash_mix(seed, static_cast<std::uint64_t>(plant.plant_index)));
      for (double& ph : jitter.phase) ph = rng.uniform(0.0, 2.0 * kPi);
    }
    const double reach = plant.radius + std::abs(options.jitter_cm);
    const int x0 = std::max(0, cm_to_pixel(plant.center.x - reach, px_per_cm));
    const int x1 = std::min(width - 1, cm_to_pixel(plant.center.x + reach, px_per_cm));
    const int y0 = std::max(0, cm_to_pixel(plant.center.y - reach, px_per_cm));
    const int y1 = std::min(height - 1, cm_to_pixel(plant.center.y + reach, px_per_cm));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Vec2 p = pixel_center_cm(x, y, px_per_cm);
        const Vec2 d = p - plant.center;
        double r = plant.radius;
        if (jitter.amplitude != 0.0) r = std::max(0.0, r + jitter.at(std::atan2(d.y, d.x)));
        if (dot(d, d) > r * r) continue;
        bool wounded = false;
        for (const auto& w : plant.wounds) {
          if (distance_sq(p, plant.center + w.offset) <= w.radius * w.radius) {
            wounded = true;
            break;
          }
        }
        if (wounded) continue;
        out.mask.labels(x, y) = static_cast<std::uint8_t>(plant.type_id);
        out.owner(x, y) = plant.plant_index;
      }
    }
  }
  return out;
}

SegmentationMask render_mask(const GardenState& state, double px_per_cm, std::uint64_t seed,
                             const RenderOptions& options) {
  return render_garden(state, px_per_cm, seed, options).mask;
}

double normalized_diversity(std::span<const double> normalized, int type_count) {
  if (type_count <= 1) return 0.0;
  double total = 0.0;
  for (double v : normalized) total += v;
  if (!(total > 0.0)) return 0.0;
  double entropy = 0.0;
  for (double v : normalized) {
    if (v <= 0.0) continue;
    const double p = v / total;
    entropy -= p * std::log(p);
  }
  return std::clamp(entropy / std::log(static_cast<double>(type_count)), 0.0, 1.0);
}

CoverageReport coverage_report(const SegmentationMask& mask, const PlantTypeCatalog& catalog) {
  if (mask.labels.empty()) throw Error(ErrorCode::InvalidInput, "empty mask");
  const int types = catalog.type_count();
  std::vector<std::size_t> counts(static_cast<std::size_t>(types) + 1, 0);
  for (std::uint8_t label : mask.labels.values()) {
    if (label > types)
      throw Error(ErrorCode::CatalogMismatch, "mask label " + std::to_string(label) + " not in catalog");
    ++counts[label];
  }
  const double total_px = static_cast<double>(mask.labels.size());
  const double avg_r = catalog.avg_max_radius();

  CoverageReport report;
  report.per_type_coverage.resize(static_cast<std::size_t>(types));
  report.normalized_vector.resize(static_cast<std::size_t>(types));
  for (int i = 1; i <= types; ++i) {
    const double c = static_cast<double>(counts[static_cast<std::size_t>(i)]) / total_px;
    const double scale = avg_r / catalog.at(i).max_radius;
    report.per_type_coverage[static_cast<std::size_t>(i - 1)] = c;
    report.normalized_vector[static_cast<std::size_t>(i - 1)] = c * scale * scale;
    report.total_coverage += c;
  }
  report.diversity = normalized_diversity(report.normalized_vector, types);
  return report;
}

}  // namespace polyprune
