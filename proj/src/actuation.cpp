#include "polyprune/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "polyprune/enclosing_disk.hpp"
#include "polyprune/error.hpp"

namespace polyprune {

const char* to_string(Tool tool) {
  switch (tool) {
    case Tool::RotaryX: return "rotary_x";
    case Tool::RotaryY: return "rotary_y";
    case Tool::Shears: return "shears";
  }
  return "unknown";
}

double cut_vector(Vec2 center, Vec2 prune_point) {
  const Vec2 d = prune_point - center;
  if (d.x == 0.0 && d.y == 0.0)
    throw Error(ErrorCode::DegenerateGeometry, "prune point coincides with plant center");
  double deg = std::atan2(d.y, d.x) * 180.0 / kPi + 90.0;
  deg = std::fmod(deg, 180.0);
  if (deg < 0.0) deg += 180.0;
  if (deg >= 180.0) deg -= 180.0;
  return deg;
}

Tool choose_rotary_tool(double cut_angle) {
  if (!(cut_angle >= 0.0 && cut_angle < 180.0))
    throw Error(ErrorCode::InvalidInput, "cut angle must be in [0, 180)");
  return std::min(cut_angle, 180.0 - cut_angle) <= 45.0 ? Tool::RotaryX : Tool::RotaryY;
}

namespace {

double descend_depth(DepthReading depth, const ActuationConfig& cfg) {
  if (depth.distance_to_canopy < 0.0 || depth.distance_to_canopy > cfg.sensor_height)
    throw Error(ErrorCode::InvalidInput, "depth reading outside sensor range");
  const double z = depth.distance_to_canopy + cfg.depth_overshoot;
  if (z > cfg.gantry_z_range) throw Error(ErrorCode::OutOfBounds, "descent exceeds gantry z range");
  return z;
}

}  // namespace

ToolCommand shear_command(Vec2 center, Vec2 prune_point, DepthReading depth, const ActuationConfig& cfg) {
  ToolCommand cmd;
  cmd.tool = Tool::Shears;
  cmd.cut_angle = cut_vector(center, prune_point);
  cmd.tilt = Tilt::Vertical;
  cmd.depth_z = descend_depth(depth, cfg);
  cmd.closure_sequence = {Closure::Open, Closure::Closed, Closure::Open};
  return cmd;
}

ToolCommand rotary_command(Vec2 center, Vec2 prune_point, DepthReading depth, const ActuationConfig& cfg) {
  ToolCommand cmd;
  cmd.tool = choose_rotary_tool(cut_vector(center, prune_point));
  cmd.cut_angle = cmd.tool == Tool::RotaryX ? 0.0 : 90.0;
  cmd.tilt = Tilt::Horizontal;
  cmd.depth_z = descend_depth(depth, cfg);
  return cmd;
}

DepthReading read_depth(const GardenState& state, const GantryPose& pose, double beta, double sensor_height) {
  double tallest = 0.0;
  const Vec2 p{pose.x, pose.y};
  for (const auto& plant : state.plants) {
    if (plant.radius > 0.0 && distance(p, plant.center) <= plant.radius)
      tallest = std::max(tallest, beta * plant.radius);
  }
  return {std::clamp(sensor_height - tallest, 0.0, sensor_height)};
}

double canopy_extent(const PlantState& plant, double step) {
  if (plant.radius <= 0.0) return 0.0;
  if (plant.wounds.empty()) return plant.radius;
  constexpr int kAngles = 360;
  for (double r = plant.radius; r > 0.0; r -= step) {
    for (int a = 0; a < kAngles; ++a) {
      const double t = 2.0 * kPi * a / kAngles;
      const Vec2 p = plant.center + r * Vec2{std::cos(t), std::sin(t)};
      if (plant.covers(p)) return r;
    }
  }
  return 0.0;
}

CutEffect apply_cut(GardenState& state, RenderedGarden& rendered, Vec2 prune_point, Tool tool,
                    const ActuationConfig& cfg) {
  auto& mask = rendered.mask;
  const double ppc = mask.px_per_cm;
  const int px = cm_to_pixel(prune_point.x, ppc), py = cm_to_pixel(prune_point.y, ppc);
  if (!rendered.owner.contains(px, py) || rendered.owner(px, py) < 0)
    throw Error(ErrorCode::NoTargetTissue, "prune point is on soil");

  CutEffect effect;
  effect.target = rendered.owner(px, py);
  const bool shears = tool == Tool::Shears;
  const double reach = shears ? cfg.shears_cut_radius : cfg.rotary_cut_radius;

  std::map<int, std::size_t> removed;
  const int x0 = std::max(0, cm_to_pixel(prune_point.x - reach, ppc));
  const int x1 = std::min(mask.width() - 1, cm_to_pixel(prune_point.x + reach, ppc));
  const int y0 = std::max(0, cm_to_pixel(prune_point.y - reach, ppc));
  const int y1 = std::min(mask.height() - 1, cm_to_pixel(prune_point.y + reach, ppc));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const int owner = rendered.owner(x, y);
      if (owner < 0 || (shears && owner != effect.target)) continue;
      if (distance(pixel_center_cm(x, y, ppc), prune_point) > reach) continue;
      ++removed[owner];
      rendered.owner(x, y) = -1;
      mask.labels(x, y) = 0;
    }
  }

  const double px_area = 1.0 / (ppc * ppc);
  for (const auto& [owner, count] : removed) {
    auto& plant = state.plant(owner);
    plant.wounds.push_back({prune_point - plant.center, reach});
    plant.radius = std::min(plant.radius, canopy_extent(plant, 0.5 / ppc));
    if (owner == effect.target) {
      effect.removed_area = static_cast<double>(count) * px_area;
    } else {
      effect.collateral.emplace_back(owner, static_cast<double>(count) * px_area);
    }
  }

  std::vector<Vec2> remaining;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (rendered.owner(x, y) == effect.target) remaining.push_back(pixel_center_cm(x, y, ppc));
  effect.new_radius = remaining.empty() ? 0.0 : smallest_enclosing_disk(remaining).radius;
  return effect;
}

}  // namespace polyprune
