#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polyprune/config.hpp"

namespace polyprune {

struct DailyRecord {
  int day = 0;
  double total_coverage = 0.0;
  double diversity = 0.0;
  std::vector<double> per_type_coverage;
  std::vector<double> normalized_vector;
  int plants_selected = 0;
  int cuts_applied = 0;
  int actions_skipped = 0;
  int servo_converged = 0;
  int servo_failed = 0;
};

struct ActionRecord {
  int day = 0;
  int plant_index = -1;
  std::string method;  // learned | baseline, empty when no point was chosen
  std::string status;  // cut | skipped
  std::string servo_status;
  int servo_iterations = 0;
  std::string reason;
};

struct CycleSummary {
  PlantTypeCatalog catalog;
  std::string tool;
  std::string tracker;
  std::uint64_t seed = 0;
  std::vector<DailyRecord> days;
  std::vector<ActionRecord> actions;

  const DailyRecord& final_day() const;
  double failure_rate() const;  // skipped / attempted, 0 without attempts
};

// Runs the daily loop. With an output directory set, writes daily.csv,
// disks.csv, snapshots.json, prune_log.csv, tool_log.csv, actions.csv,
// servo/day_DDD_plant_KK.csv and summary.json.
CycleSummary run_cycle(const CycleConfig& cfg);

struct DayDelta {
  int day = 0;
  double coverage_a = 0.0, coverage_b = 0.0;
  double diversity_a = 0.0, diversity_b = 0.0;
  double coverage_delta() const { return coverage_b - coverage_a; }
  double diversity_delta() const { return diversity_b - diversity_a; }
};

struct TypeChange {
  int type_id = 0;
  std::string name;
  double a = 0.0;  // final-day c_i (R / R_i)^2
  double b = 0.0;
  std::optional<double> percent;  // empty when a == 0
};

struct CycleComparison {
  std::vector<DayDelta> days;
  std::vector<TypeChange> types;
  std::optional<double> diversity_percent;
  std::optional<double> coverage_percent;
};

// (b - a) / a * 100; empty when a == 0.
std::optional<double> percent_change(double a, double b);
// Two decimals with sign, or "N/A".
std::string format_percent(std::optional<double> percent);

CycleComparison compare_cycles(const CycleSummary& a, const CycleSummary& b);
std::string comparison_table(const CycleComparison& cmp);
std::string comparison_csv(const CycleComparison& cmp);

std::string summary_to_json(const CycleSummary& summary);
CycleSummary summary_from_json(const std::string& text);
void write_summary(const std::filesystem::path& path, const CycleSummary& summary);
CycleSummary read_summary(const std::filesystem::path& path);

}  // namespace polyprune
