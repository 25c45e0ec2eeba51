#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polyprune/actuation.hpp"
#include "polyprune/garden.hpp"
#include "polyprune/planner.hpp"
#include "polyprune/servoing.hpp"
#include "polyprune/tracking.hpp"

namespace polyprune {

struct SeedPlacement {
  int type_id = 0;
  Vec2 center;  // cm
};

struct GardenConfig {
  double bed_width = 150.0;   // cm
  double bed_height = 150.0;  // cm
  double px_per_cm = 2.0;
  PlantTypeCatalog catalog = default_catalog();
  std::vector<SeedPlacement> placements;
  std::uint64_t seed = 1;

  // Day-0 state: every placement at radius 0 in germination.
  GardenState initial_state() const;
};

// Uniform placements with a minimum spacing, plants_per_type of every type.
std::vector<SeedPlacement> random_placements(const PlantTypeCatalog& catalog, double bed_width,
                                             double bed_height, int plants_per_type, std::uint64_t seed,
                                             double margin_cm = 10.0, double min_spacing_cm = 15.0);

enum class ToolChoice { None, Rotary, Shears };
enum class TrackerChoice { Bfs, KMeans, Mixed };

const char* to_string(ToolChoice tool);
const char* to_string(TrackerChoice tracker);
ToolChoice parse_tool(const std::string& name);
TrackerChoice parse_tracker(const std::string& name);

struct CycleConfig {
  GardenConfig garden;
  int total_days = 60;
  int prune_start_day = 30;
  int prune_interval_days = 5;
  ToolChoice tool = ToolChoice::Shears;
  TrackerChoice tracker = TrackerChoice::Bfs;
  std::filesystem::path out_dir;  // empty: keep results in memory only
  std::uint64_t seed = 1;
  int max_actions_per_day = 0;  // 0: unlimited
  bool write_svg = false;

  TrackerConfig tracking;
  PlannerConfig planner;
  ServoConfig servo;
  CameraConfig camera;
  ActuationConfig actuation;
  HeatmapSynthesis heatmap;
  RenderOptions render;

  // Optional per-day inputs named day_NNN.plg; missing days fall back to
  // rendering / synthesis.
  std::optional<std::filesystem::path> likelihood_dir;
  std::optional<std::filesystem::path> heatmap_dir;
  bool use_location_prior = true;
  double prior_alpha = 5.0;

  void validate() const;
  bool is_prune_day(int day) const;
};

// Loads a JSON garden/cycle description. Unknown keys are rejected so typos
// surface early. Relative paths resolve against the file's directory.
CycleConfig load_cycle_config(const std::filesystem::path& path);
CycleConfig parse_cycle_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

}  // namespace polyprune
