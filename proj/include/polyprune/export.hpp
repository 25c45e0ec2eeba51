#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polyprune/actuation.hpp"
#include "polyprune/garden.hpp"
#include "polyprune/planner.hpp"
#include "polyprune/servoing.hpp"
#include "polyprune/tracking.hpp"

namespace polyprune {

// Fixed-point text for logs; negative zero prints as zero.
std::string fixed(double value, int precision = 4);

void write_disks_header(std::ostream& out);
void write_disks_rows(std::ostream& out, const DiskSet& disks);

// Parses rows written by write_disks_rows, grouped by day in file order.
std::vector<DiskSet> read_disks_csv(std::istream& in);

void write_servo_trace(std::ostream& out, const std::vector<ServoIteration>& trace);

void write_prune_log_header(std::ostream& out);
void write_prune_log_row(std::ostream& out, int day, int plant_index, Vec2 point, std::optional<int> neighbor,
                         double decay_rate, const std::string& method);

void write_tool_log_header(std::ostream& out);
void write_tool_log_row(std::ostream& out, int day, int plant_index, const ToolCommand& command,
                        const CutEffect& effect);

// One JSON object per plant: {day, plant_index, type_id, cx, cy, r, stage}.
std::string snapshot_records(const GardenState& state);

// Simple line chart; each series is (label, values by day).
std::string svg_line_chart(const std::string& title, const std::vector<int>& days,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series);

}  // namespace polyprune
