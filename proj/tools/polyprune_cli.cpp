// polyprune command line: full cycles and the individual pipeline stages.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "polyprune/config.hpp"
#include "polyprune/cycle.hpp"
#include "polyprune/error.hpp"
#include "polyprune/export.hpp"
#include "polyprune/image_io.hpp"

using namespace polyprune;

namespace {

CycleConfig base_config(const std::string& path, std::optional<std::uint64_t> seed) {
  CycleConfig cfg;
  if (!path.empty()) {
    cfg = load_cycle_config(path);
  } else {
    cfg.garden.px_per_cm = 1.0;
    cfg.camera.px_per_cm = 1.0;
    cfg.garden.seed = seed.value_or(1);
    cfg.garden.placements = random_placements(cfg.garden.catalog, cfg.garden.bed_width, cfg.garden.bed_height, 2,
                                              cfg.garden.seed);
  }
  if (seed) cfg.seed = *seed;
  return cfg;
}

SegmentationMask load_mask(const std::string& path, double ppc) {
  return {read_pgm(path), ppc};
}

GardenState state_for(const CycleConfig& cfg, const DiskSet* prev, int day) {
  GardenState state = cfg.garden.initial_state();
  state.day = day;
  for (auto& p : state.plants) {
    p.stage = cfg.garden.catalog.at(p.type_id).stage_at(day);
    if (prev) p.radius = prev->disk(p.plant_index).radius;
  }
  return state;
}

std::vector<DiskSet> load_disks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_disks_csv(in);
}

GrayImage load_gray(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".plg") {
    const Grid3<float> g = read_plg(path);
    GrayImage img(g.height(), g.width());
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) img(x, y) = g.pixel(x, y)[0];
    return img;
  }
  return dequantize(read_pgm(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyculture pruning pipeline: tracking, planning, servoing and cutting on synthetic gardens"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string tool, tracker, out_dir;
  std::optional<int> days;
  bool svg = false;
  auto* run = app.add_subcommand("run", "Simulate a full garden cycle");
  run->add_option("--config", config_path, "Garden/cycle JSON")->envname("POLYPRUNE_CONFIG");
  run->add_option("--seed", seed, "Master seed")->envname("POLYPRUNE_SEED");
  run->add_option("--tool", tool, "none | rotary | shears")->envname("POLYPRUNE_TOOL");
  run->add_option("--tracker", tracker, "bfs | kmeans | mixed")->envname("POLYPRUNE_TRACKER");
  run->add_option("--out", out_dir, "Output directory")->envname("POLYPRUNE_OUT")->required();
  run->add_option("--days", days, "Total days")->envname("POLYPRUNE_DAYS");
  run->add_flag("--svg", svg, "Write metrics.svg");

  std::string mask_path, prev_path;
  double ppc = 0.0;
  int day = 1;
  auto* track = app.add_subcommand("track", "Track bounding disks in one mask");
  track->add_option("--config", config_path, "Garden JSON with the seed placements")->required();
  track->add_option("--mask", mask_path, "Label mask (PGM, gray value = type id)")->required();
  track->add_option("--prev", prev_path, "Previous disks CSV (last day is used)");
  track->add_option("--tracker", tracker, "bfs | kmeans | mixed");
  track->add_option("--day", day, "Day of the mask");
  track->add_option("--ppc", ppc, "Pixels per cm (default from config)");

  std::string disks_path, heatmap_path;
  std::optional<int> target;
  auto* plan = app.add_subcommand("plan", "Choose plants and prune points");
  plan->add_option("--config", config_path, "Garden JSON")->required();
  plan->add_option("--mask", mask_path, "Label mask (PGM)")->required();
  plan->add_option("--disks", disks_path, "Disk history CSV (last day is current)")->required();
  plan->add_option("--heatmap", heatmap_path, "Leaf heatmap (PGM or single-channel PLG)")->required();
  plan->add_option("--target", target, "Plan for this plant only");
  plan->add_option("--ppc", ppc, "Pixels per cm (default from config)");

  std::string global_path, trace_path;
  double sx = 0, sy = 0, tx = 0, ty = 0;
  double z = 40.0;
  auto* servo = app.add_subcommand("servo", "Servo a simulated camera onto a point");
  servo->add_option("--global", global_path, "Overhead image (PGM or PLG)")->required();
  servo->add_option("--start-x", sx)->required();
  servo->add_option("--start-y", sy)->required();
  servo->add_option("--target-x", tx)->required();
  servo->add_option("--target-y", ty)->required();
  servo->add_option("--z", z, "Camera height in cm");
  servo->add_option("--ppc", ppc, "Pixels per cm")->default_val(1.0);
  servo->add_option("--search-radius", "Search window half-side in cm");
  servo->add_option("--trace", trace_path, "Write the trace CSV here instead of stdout");

  auto* metrics = app.add_subcommand("metrics", "Coverage and diversity of a mask");
  metrics->add_option("--mask", mask_path, "Label mask (PGM)")->required();
  metrics->add_option("--config", config_path, "Garden JSON (catalog); default catalog otherwise");
  metrics->add_option("--ppc", ppc, "Pixels per cm")->default_val(1.0);

  std::string summary_a, summary_b, csv_path;
  auto* compare = app.add_subcommand("compare", "Compare two cycle summaries");
  compare->add_option("a", summary_a, "Baseline summary.json")->required();
  compare->add_option("b", summary_b, "Other summary.json")->required();
  compare->add_option("--csv", csv_path, "Write per-day deltas here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      CycleConfig cfg = base_config(config_path, seed);
      if (!tool.empty()) cfg.tool = parse_tool(tool);
      if (!tracker.empty()) cfg.tracker = parse_tracker(tracker);
      if (days) {
        cfg.total_days = *days;
        cfg.prune_start_day = std::min(cfg.prune_start_day, cfg.total_days);
      }
      cfg.out_dir = out_dir;
      cfg.write_svg = cfg.write_svg || svg;
      const CycleSummary s = run_cycle(cfg);
      std::size_t cuts = 0;
      for (const auto& a : s.actions) cuts += a.status == "cut";
      std::cout << "days " << s.days.size() << "  tool " << s.tool << "  actions " << s.actions.size() << "  cuts "
                << cuts << "  failure_rate " << fixed(s.failure_rate(), 3) << "\n";
      if (!s.days.empty()) {
        std::cout << "final coverage " << fixed(s.final_day().total_coverage, 4) << "  diversity "
                  << fixed(s.final_day().diversity, 4) << "\n";
      }
    } else if (*track) {
      CycleConfig cfg = load_cycle_config(config_path);
      if (ppc <= 0.0) ppc = cfg.garden.px_per_cm;
      const SegmentationMask mask = load_mask(mask_path, ppc);
      std::optional<DiskSet> prev;
      if (!prev_path.empty()) {
        auto all = load_disks(prev_path);
        if (!all.empty()) prev = all.back();
      }
      GardenState state = state_for(cfg, prev ? &*prev : nullptr, day);
      const DiskSet start = prev ? *prev : initial_disks(state);
      const TrackerChoice choice = tracker.empty() ? TrackerChoice::Bfs : parse_tracker(tracker);
      DiskSet out;
      if (choice == TrackerChoice::Bfs) out = bfs_track(mask, start, state, cfg.garden.catalog, cfg.tracking);
      else if (choice == TrackerChoice::KMeans) out = kmeans_track(mask, state, cfg.tracking);
      else out = mixed_track(mask, start, state, cfg.garden.catalog, cfg.tracking);
      out.day = day;
      write_disks_header(std::cout);
      write_disks_rows(std::cout, out);
    } else if (*plan) {
      CycleConfig cfg = load_cycle_config(config_path);
      if (ppc <= 0.0) ppc = cfg.garden.px_per_cm;
      const SegmentationMask mask = load_mask(mask_path, ppc);
      const auto all = load_disks(disks_path);
      if (all.empty()) throw Error(ErrorCode::InvalidInput, "disk history is empty");
      RadiusHistory history;
      for (const auto& d : all) history.record(d);
      const DiskSet& current = all.back();
      const PruneHeatmap heatmap{load_gray(heatmap_path), ppc, current.day};
      const auto report = coverage_report(mask, cfg.garden.catalog);
      std::vector<int> targets =
          target ? std::vector<int>{*target} : select_plants_to_prune(report, current, cfg.garden.catalog, cfg.planner);
      const auto candidates = extract_prune_points(heatmap, mask, current, cfg.planner);
      write_prune_log_header(std::cout);
      for (int t : targets) {
        try {
          const auto sel = select_prune_point(candidates, current, history, t, cfg.planner);
          write_prune_log_row(std::cout, current.day, t, sel.point.position, sel.neighbor, sel.decay_rate, "learned");
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoPrunePoint) throw;
          write_prune_log_row(std::cout, current.day, t, baseline_prune_point(mask, current.disk(t)), std::nullopt,
                              0.0, "baseline");
        }
      }
    } else if (*servo) {
      const GrayImage global = load_gray(global_path);
      ServoConfig scfg;
      if (auto* opt = servo->get_option("--search-radius"); opt->count()) scfg.search_radius = opt->as<double>();
      CameraConfig cam;
      cam.px_per_cm = ppc;
      SimulatedCamera camera(global, cam);
      const ServoOutcome outcome = servo_loop(camera, global, {sx, sy, z}, {tx, ty}, ppc, scfg);
      if (trace_path.empty()) {
        write_servo_trace(std::cout, outcome.trace);
      } else {
        std::ofstream out(trace_path, std::ios::binary);
        write_servo_trace(out, outcome.trace);
      }
      std::cerr << "status " << to_string(outcome.status) << "  captures " << outcome.iterations << "  pose "
                << fixed(outcome.pose.x) << ' ' << fixed(outcome.pose.y) << "\n";
      return outcome.status == ServoStatus::Converged ? 0 : 3;
    } else if (*metrics) {
      const PlantTypeCatalog catalog = config_path.empty() ? default_catalog() : load_cycle_config(config_path).garden.catalog;
      const auto report = coverage_report(load_mask(mask_path, ppc), catalog);
      nlohmann::ordered_json j;
      j["total_coverage"] = report.total_coverage;
      j["diversity"] = report.diversity;
      j["per_type_coverage"] = report.per_type_coverage;
      j["normalized_vector"] = report.normalized_vector;
      std::cout << j.dump(2) << "\n";
    } else if (*compare) {
      const auto cmp = compare_cycles(read_summary(summary_a), read_summary(summary_b));
      std::cout << comparison_table(cmp);
      if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        out << comparison_csv(cmp);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
