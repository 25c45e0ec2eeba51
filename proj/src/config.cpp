#include "polyprune/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "polyprune/error.hpp"
#include "polyprune/rng.hpp"

namespace polyprune {

using nlohmann::json;

GardenState GardenConfig::initial_state() const {
  GardenState state;
  state.day = 0;
  state.bed_width = bed_width;
  state.bed_height = bed_height;
  int k = 0;
  for (const auto& p : placements) {
    PlantState plant;
    plant.plant_index = k++;
    plant.type_id = p.type_id;
    plant.center = p.center;
    plant.stage = catalog.at(p.type_id).stage_at(0.0);
    state.plants.push_back(plant);
  }
  state.validate(catalog);
  return state;
}

std::vector<SeedPlacement> random_placements(const PlantTypeCatalog& catalog, double bed_width,
                                             double bed_height, int plants_per_type, std::uint64_t seed,
                                             double margin_cm, double min_spacing_cm) {
  if (plants_per_type < 0) throw Error(ErrorCode::InvalidInput, "negative plant count");
  if (bed_width <= 2 * margin_cm || bed_height <= 2 * margin_cm)
    throw Error(ErrorCode::InvalidInput, "bed too small for the placement margin");
  Rng rng(seed);
  std::vector<SeedPlacement> out;
  for (int round = 0; round < plants_per_type; ++round) {
    for (const auto& type : catalog.types()) {
      Vec2 best{};
      double best_gap = -1.0;
      // Rejection sampling; keep the most isolated draw if spacing is infeasible.
      for (int attempt = 0; attempt < 200; ++attempt) {
        const Vec2 c{rng.uniform(margin_cm, bed_width - margin_cm), rng.uniform(margin_cm, bed_height - margin_cm)};
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& o : out) gap = std::min(gap, distance(o.center, c));
        if (gap > best_gap) {
          best_gap = gap;
          best = c;
        }
        if (gap >= min_spacing_cm) break;
      }
      out.push_back({type.type_id, best});
    }
  }
  return out;
}

const char* to_string(ToolChoice tool) {
  switch (tool) {
    case ToolChoice::None: return "none";
    case ToolChoice::Rotary: return "rotary";
    case ToolChoice::Shears: return "shears";
  }
  return "unknown";
}

const char* to_string(TrackerChoice tracker) {
  switch (tracker) {
    case TrackerChoice::Bfs: return "bfs";
    case TrackerChoice::KMeans: return "kmeans";
    case TrackerChoice::Mixed: return "mixed";
  }
  return "unknown";
}

ToolChoice parse_tool(const std::string& name) {
  if (name == "none") return ToolChoice::None;
  if (name == "rotary") return ToolChoice::Rotary;
  if (name == "shears") return ToolChoice::Shears;
  throw Error(ErrorCode::InvalidInput, "unknown tool '" + name + "' (none|rotary|shears)");
}

TrackerChoice parse_tracker(const std::string& name) {
  if (name == "bfs") return TrackerChoice::Bfs;
  if (name == "kmeans") return TrackerChoice::KMeans;
  if (name == "mixed") return TrackerChoice::Mixed;
  throw Error(ErrorCode::InvalidInput, "unknown tracker '" + name + "' (bfs|kmeans|mixed)");
}

void CycleConfig::validate() const {
  if (total_days < 0) throw Error(ErrorCode::InvalidInput, "total_days must be >= 0");
  if (prune_start_day > total_days) throw Error(ErrorCode::InvalidInput, "prune_start_day exceeds total_days");
  if (prune_interval_days < 1) throw Error(ErrorCode::InvalidInput, "prune_interval_days must be >= 1");
  if (!(garden.px_per_cm > 0.0)) throw Error(ErrorCode::InvalidScale, "px_per_cm must be positive");
  tracking.validate();
  planner.validate();
  servo.validate();
}

bool CycleConfig::is_prune_day(int day) const {
  return day >= prune_start_day && day <= total_days && (day - prune_start_day) % prune_interval_days == 0;
}

namespace {

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidInput, std::string(where) + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw Error(ErrorCode::InvalidInput, std::string("unknown key '") + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

PlantTypeCatalog parse_catalog(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "default") throw Error(ErrorCode::InvalidInput, "catalog must be 'default' or a list");
    return default_catalog();
  }
  std::vector<PlantTypeParams> types;
  for (const auto& e : j) {
    check_keys(e, "catalog entry",
               {"type_id", "name", "germination_days", "maturation_days", "max_radius_cm",
                "wilting_rate_cm_per_day", "wilt_start_days"});
    PlantTypeParams t;
    t.type_id = e.at("type_id").get<int>();
    t.name = e.value("name", "type" + std::to_string(t.type_id));
    t.germination_days = e.at("germination_days").get<double>();
    t.maturation_days = e.at("maturation_days").get<double>();
    t.max_radius = e.at("max_radius_cm").get<double>();
    t.wilting_rate = e.value("wilting_rate_cm_per_day", 0.5);
    if (e.contains("wilt_start_days")) t.wilt_start_days = e.at("wilt_start_days").get<double>();
    types.push_back(t);
  }
  return PlantTypeCatalog(std::move(types));
}

}  // namespace

CycleConfig parse_cycle_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(root, "config",
               {"bed", "px_per_cm", "seed", "catalog", "plants", "random_placement", "cycle", "tracker",
                "planner", "servo", "camera", "actuation", "heatmap", "render", "inputs"});
    CycleConfig cfg;
    auto& g = cfg.garden;
    if (root.contains("bed")) {
      const auto& bed = root.at("bed");
      check_keys(bed, "bed", {"width_cm", "height_cm"});
      read(bed, "width_cm", g.bed_width);
      read(bed, "height_cm", g.bed_height);
    }
    read(root, "px_per_cm", g.px_per_cm);
    read(root, "seed", g.seed);
    cfg.seed = g.seed;
    if (root.contains("catalog")) g.catalog = parse_catalog(root.at("catalog"));

    if (root.contains("plants") && root.contains("random_placement"))
      throw Error(ErrorCode::InvalidInput, "give either plants or random_placement, not both");
    if (root.contains("plants")) {
      for (const auto& p : root.at("plants")) {
        check_keys(p, "plant", {"type_id", "x_cm", "y_cm"});
        g.placements.push_back({p.at("type_id").get<int>(), {p.at("x_cm").get<double>(), p.at("y_cm").get<double>()}});
      }
    } else if (root.contains("random_placement")) {
      const auto& rp = root.at("random_placement");
      check_keys(rp, "random_placement", {"plants_per_type", "margin_cm", "min_spacing_cm"});
      g.placements = random_placements(g.catalog, g.bed_width, g.bed_height, rp.value("plants_per_type", 2),
                                       g.seed, rp.value("margin_cm", 10.0), rp.value("min_spacing_cm", 15.0));
    }

    if (root.contains("cycle")) {
      const auto& c = root.at("cycle");
      check_keys(c, "cycle",
                 {"total_days", "prune_start_day", "prune_interval_days", "tool", "tracker", "max_actions_per_day",
                  "write_svg"});
      read(c, "total_days", cfg.total_days);
      read(c, "prune_start_day", cfg.prune_start_day);
      read(c, "prune_interval_days", cfg.prune_interval_days);
      if (c.contains("tool")) cfg.tool = parse_tool(c.at("tool").get<std::string>());
      if (c.contains("tracker")) cfg.tracker = parse_tracker(c.at("tracker").get<std::string>());
      read(c, "max_actions_per_day", cfg.max_actions_per_day);
      read(c, "write_svg", cfg.write_svg);
    }
    if (root.contains("tracker")) {
      const auto& t = root.at("tracker");
      check_keys(t, "tracker",
                 {"ring_width_px", "accept_fraction", "kmeans_max_iters", "kmeans_tolerance_cm", "kmeans_scale_refine",
                  "mixed_size_threshold_cm", "mixed_occlusion_limit", "recenter"});
      read(t, "ring_width_px", cfg.tracking.ring_width_px);
      read(t, "accept_fraction", cfg.tracking.accept_fraction);
      read(t, "kmeans_max_iters", cfg.tracking.kmeans_max_iters);
      read(t, "kmeans_tolerance_cm", cfg.tracking.kmeans_tolerance);
      read(t, "kmeans_scale_refine", cfg.tracking.kmeans_scale_refine);
      read(t, "mixed_size_threshold_cm", cfg.tracking.mixed_size_threshold);
      read(t, "mixed_occlusion_limit", cfg.tracking.mixed_occlusion_limit);
      read(t, "recenter", cfg.tracking.recenter);
    }
    if (root.contains("planner")) {
      const auto& p = root.at("planner");
      check_keys(p, "planner",
                 {"initial_threshold", "edge_margin_cm", "renorm_rounds", "dominance_factor", "neighbor_gap_cm",
                  "min_confidence", "decay_window_days"});
      read(p, "initial_threshold", cfg.planner.initial_threshold);
      read(p, "edge_margin_cm", cfg.planner.edge_margin);
      read(p, "renorm_rounds", cfg.planner.renorm_rounds);
      read(p, "dominance_factor", cfg.planner.dominance_factor);
      read(p, "neighbor_gap_cm", cfg.planner.neighbor_gap);
      read(p, "min_confidence", cfg.planner.min_confidence);
      read(p, "decay_window_days", cfg.planner.decay_window_days);
    }
    if (root.contains("servo")) {
      const auto& s = root.at("servo");
      check_keys(s, "servo",
                 {"step_cap_cm", "tolerance_cm", "max_iterations", "scale_set", "search_radius_cm", "min_score", "min_sharpness_ratio",
                  "subpixel"});
      read(s, "step_cap_cm", cfg.servo.step_cap);
      read(s, "tolerance_cm", cfg.servo.tolerance);
      read(s, "max_iterations", cfg.servo.max_iterations);
      read(s, "scale_set", cfg.servo.scale_set);
      read(s, "search_radius_cm", cfg.servo.search_radius);
      read(s, "min_score", cfg.servo.min_score);
      read(s, "min_sharpness_ratio", cfg.servo.min_sharpness_ratio);
      read(s, "subpixel", cfg.servo.subpixel);
    }
    if (root.contains("camera")) {
      const auto& c = root.at("camera");
      check_keys(c, "camera", {"sensor_px", "reference_height_cm", "noise_sigma", "blur_sigma_px"});
      read(c, "sensor_px", cfg.camera.sensor_px);
      read(c, "reference_height_cm", cfg.camera.reference_height);
      read(c, "noise_sigma", cfg.camera.noise_sigma);
      read(c, "blur_sigma_px", cfg.camera.blur_sigma_px);
    }
    if (root.contains("actuation")) {
      const auto& a = root.at("actuation");
      check_keys(a, "actuation",
                 {"sensor_height_cm", "depth_overshoot_cm", "gantry_z_range_cm", "height_per_radius",
                  "rotary_cut_radius_cm", "shears_cut_radius_cm"});
      read(a, "sensor_height_cm", cfg.actuation.sensor_height);
      read(a, "depth_overshoot_cm", cfg.actuation.depth_overshoot);
      read(a, "gantry_z_range_cm", cfg.actuation.gantry_z_range);
      read(a, "height_per_radius", cfg.actuation.height_per_radius);
      read(a, "rotary_cut_radius_cm", cfg.actuation.rotary_cut_radius);
      read(a, "shears_cut_radius_cm", cfg.actuation.shears_cut_radius);
    }
    if (root.contains("heatmap")) {
      const auto& h = root.at("heatmap");
      check_keys(h, "heatmap", {"leaf_spacing_cm", "bump_sigma_cm", "min_plant_radius_cm", "min_leaf_confidence"});
      read(h, "leaf_spacing_cm", cfg.heatmap.leaf_spacing_cm);
      read(h, "bump_sigma_cm", cfg.heatmap.bump_sigma_cm);
      read(h, "min_plant_radius_cm", cfg.heatmap.min_plant_radius_cm);
      read(h, "min_leaf_confidence", cfg.heatmap.min_leaf_confidence);
    }
    if (root.contains("render")) {
      const auto& r = root.at("render");
      check_keys(r, "render", {"jitter_cm"});
      read(r, "jitter_cm", cfg.render.jitter_cm);
    }
    if (root.contains("inputs")) {
      const auto& in = root.at("inputs");
      check_keys(in, "inputs", {"likelihood_dir", "heatmap_dir", "use_location_prior", "prior_alpha"});
      if (in.contains("likelihood_dir")) cfg.likelihood_dir = base_dir / in.at("likelihood_dir").get<std::string>();
      if (in.contains("heatmap_dir")) cfg.heatmap_dir = base_dir / in.at("heatmap_dir").get<std::string>();
      read(in, "use_location_prior", cfg.use_location_prior);
      read(in, "prior_alpha", cfg.prior_alpha);
    }
    cfg.camera.px_per_cm = g.px_per_cm;
    cfg.garden.initial_state();  // validates placements against the catalog
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config: ") + e.what());
  }
}

CycleConfig load_cycle_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_cycle_config(buf.str(), path.parent_path());
}

}  // namespace polyprune
