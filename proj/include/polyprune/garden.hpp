#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyprune/geometry.hpp"
#include "polyprune/grid.hpp"
#include "polyprune/mask.hpp"

namespace polyprune {

enum class Stage { Germination, Growth, Waiting, Wilting };

const char* to_string(Stage stage);

struct PlantTypeParams {
  int type_id = 0;
  std::string name;
  double germination_days = 0.0;
  double maturation_days = 0.0;
  double max_radius = 0.0;      // cm
  double wilting_rate = 0.0;    // cm/day
  std::optional<double> wilt_start_days;  // defaults to maturation + 15

  double growth_days() const { return maturation_days - germination_days; }
  double growth_per_day() const { return max_radius / growth_days(); }
  double wilt_start() const { return wilt_start_days.value_or(maturation_days + 15.0); }
  Stage stage_at(double day) const;
};

class PlantTypeCatalog {
 public:
  PlantTypeCatalog() = default;
  explicit PlantTypeCatalog(std::vector<PlantTypeParams> types);

  const PlantTypeParams& at(int type_id) const;
  bool contains(int type_id) const noexcept {
    return type_id >= 1 && type_id <= type_count();
  }
  int type_count() const noexcept { return static_cast<int>(types_.size()); }
  std::span<const PlantTypeParams> types() const noexcept { return types_; }

  // Mean of all R_i, computed from the member list on every call.
  double avg_max_radius() const;

  friend bool operator==(const PlantTypeCatalog& a, const PlantTypeCatalog& b);

 private:
  std::vector<PlantTypeParams> types_;
};

// Ten polyculture plant types. Maximum radii are measured r_max values;
// lifecycle timings are first-order defaults.
PlantTypeCatalog default_catalog();

// A region removed from a plant's canopy by a cut, relative to the plant center.
struct Wound {
  Vec2 offset;
  double radius = 0.0;
};

struct PlantState {
  int plant_index = 0;
  int type_id = 0;
  Vec2 center;
  double radius = 0.0;
  Stage stage = Stage::Germination;
  std::vector<Wound> wounds;

  bool covers(Vec2 p) const;
};

struct GardenState {
  int day = 0;
  double bed_width = 0.0;   // cm
  double bed_height = 0.0;  // cm
  std::vector<PlantState> plants;

  // Throws CatalogMismatch or InvalidInput when an invariant is broken.
  void validate(const PlantTypeCatalog& catalog) const;
  const PlantState& plant(int plant_index) const;
  PlantState& plant(int plant_index);
};

GardenState advance_day(const GardenState& state, const PlantTypeCatalog& catalog);

// Largest radius the plant can reach after one more day of growth.
double max_next_radius(const PlantState& plant, const PlantTypeCatalog& catalog);

struct RenderOptions {
  double jitter_cm = 0.0;  // boundary jitter amplitude
};

// Mask plus the index of the plant that owns each pixel (-1 for soil).
struct RenderedGarden {
  SegmentationMask mask;
  Grid<std::int32_t> owner;
};

RenderedGarden render_garden(const GardenState& state, double px_per_cm, std::uint64_t seed,
                             const RenderOptions& options = {});
SegmentationMask render_mask(const GardenState& state, double px_per_cm, std::uint64_t seed,
                             const RenderOptions& options = {});

struct CoverageReport {
  std::vector<double> per_type_coverage;  // index type_id - 1
  double total_coverage = 0.0;
  std::vector<double> normalized_vector;  // c_i * (R / R_i)^2
  double diversity = 0.0;
};

CoverageReport coverage_report(const SegmentationMask& mask, const PlantTypeCatalog& catalog);

// Shannon entropy of v / sum(v) in nats, divided by ln(type_count). Zero when
// the vector sums to zero or there is a single type.
double normalized_diversity(std::span<const double> normalized, int type_count);

}  // namespace polyprune
