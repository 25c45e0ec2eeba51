#pragma once

#include <utility>
#include <vector>

#include "polyprune/garden.hpp"
#include "polyprune/geometry.hpp"
#include "polyprune/servoing.hpp"

namespace polyprune {

enum class Tool { RotaryX, RotaryY, Shears };
enum class Tilt { Horizontal, Vertical };
enum class Closure { Open, Closed };

const char* to_string(Tool tool);

struct ToolCommand {
  Tool tool = Tool::Shears;
  double cut_angle = 0.0;  // degrees in [0, 180)
  Tilt tilt = Tilt::Horizontal;
  double depth_z = 0.0;  // cm to descend from the sensor plane
  std::vector<Closure> closure_sequence;
};

// Shears are parked open and horizontal between cuts.
constexpr Tilt kShearsRestTilt = Tilt::Horizontal;
constexpr Closure kShearsRestClosure = Closure::Open;

struct DepthReading {
  double distance_to_canopy = 0.0;  // cm from the sensor plane
};

struct ActuationConfig {
  double sensor_height = 40.0;      // cm above soil
  double depth_overshoot = 5.0;     // cm past the reading
  double gantry_z_range = 50.0;     // cm of descent available
  double height_per_radius = 0.5;   // plant height model h = beta * r
  double rotary_cut_radius = 4.0;   // cm, erases every plant in reach
  double shears_cut_radius = 2.0;   // cm, target tissue only
};

// Direction perpendicular to (prune_point - center), folded into [0, 180).
double cut_vector(Vec2 center, Vec2 prune_point);

Tool choose_rotary_tool(double cut_angle);

ToolCommand shear_command(Vec2 center, Vec2 prune_point, DepthReading depth, const ActuationConfig& cfg = {});
ToolCommand rotary_command(Vec2 center, Vec2 prune_point, DepthReading depth, const ActuationConfig& cfg = {});

DepthReading read_depth(const GardenState& state, const GantryPose& pose, double beta, double sensor_height = 40.0);

struct CutEffect {
  int target = -1;
  double removed_area = 0.0;  // cm^2 of target tissue
  double new_radius = 0.0;    // enclosing radius of the target's remaining pixels
  std::vector<std::pair<int, double>> collateral;  // (plant_index, removed cm^2)
};

// Erases tissue around the prune point in both the rendered garden and the
// state (as persistent wounds). The target is the plant visible at the point.
CutEffect apply_cut(GardenState& state, RenderedGarden& rendered, Vec2 prune_point, Tool tool,
                    const ActuationConfig& cfg = {});

// Farthest distance from the plant center still carrying tissue after wounds,
// resolved to `step` cm.
double canopy_extent(const PlantState& plant, double step);

}  // namespace polyprune
