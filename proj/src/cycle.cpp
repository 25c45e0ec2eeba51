#include "polyprune/cycle.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "polyprune/error.hpp"
#include "polyprune/export.hpp"
#include "polyprune/image_io.hpp"
#include "polyprune/prior.hpp"
#include "polyprune/rng.hpp"

namespace polyprune {

using nlohmann::json;

const DailyRecord& CycleSummary::final_day() const {
  if (days.empty()) throw Error(ErrorCode::InvalidInput, "summary has no days");
  return days.back();
}

double CycleSummary::failure_rate() const {
  std::size_t skipped = 0;
  for (const auto& a : actions) skipped += a.status != "cut";
  return actions.empty() ? 0.0 : static_cast<double>(skipped) / static_cast<double>(actions.size());
}

namespace {

struct ServoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string day_file(int day, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "day_%03d.%s", day, ext);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

struct Logs {
  std::filesystem::path dir;
  std::ofstream daily, disks, snapshots, prune, tools, actions;
  bool first_snapshot = true;

  explicit Logs(const std::filesystem::path& out_dir) : dir(out_dir) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir / "servo");
    daily = open_out(dir / "daily.csv");
    disks = open_out(dir / "disks.csv");
    snapshots = open_out(dir / "snapshots.json");
    prune = open_out(dir / "prune_log.csv");
    tools = open_out(dir / "tool_log.csv");
    actions = open_out(dir / "actions.csv");
    write_disks_header(disks);
    write_prune_log_header(prune);
    write_tool_log_header(tools);
    actions << "day,plant_index,method,status,servo_status,servo_iterations,reason\n";
    snapshots << "[\n";
  }
  bool enabled() const { return !dir.empty(); }
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

SegmentationMask observe(const CycleConfig& cfg, const RenderedGarden& truth, const GardenState& prev, int day) {
  if (!cfg.likelihood_dir) return truth.mask;
  const auto path = *cfg.likelihood_dir / day_file(day, "plg");
  if (!std::filesystem::exists(path)) return truth.mask;
  LikelihoodGrid likelihood = read_plg(path);
  const auto& catalog = cfg.garden.catalog;
  if (likelihood.height() != truth.mask.height() || likelihood.width() != truth.mask.width() ||
      likelihood.channels() != catalog.type_count() + 1)
    throw Error(ErrorCode::ShapeMismatch, "likelihood grid " + path.string() + " does not match the bed");
  if (cfg.use_location_prior) {
    std::vector<PriorPlacement> placements;
    for (const auto& p : prev.plants) placements.push_back({p.center, p.type_id, max_next_radius(p, catalog)});
    const GridShape shape{likelihood.height(), likelihood.width(), likelihood.channels()};
    likelihood = apply_prior(likelihood, build_occupancy_grid(placements, shape, cfg.garden.px_per_cm, cfg.prior_alpha));
  }
  return argmax_label(likelihood, cfg.garden.px_per_cm);
}

PruneHeatmap heatmap_for(const CycleConfig& cfg, const RenderedGarden& truth, const GardenState& state, int day) {
  if (cfg.heatmap_dir) {
    const auto path = *cfg.heatmap_dir / day_file(day, "plg");
    if (std::filesystem::exists(path)) {
      const Grid3<float> g = read_plg(path);
      if (g.height() != truth.mask.height() || g.width() != truth.mask.width() || g.channels() != 1)
        throw Error(ErrorCode::ShapeMismatch, "heatmap " + path.string() + " does not match the bed");
      PruneHeatmap h{GrayImage(g.height(), g.width()), cfg.garden.px_per_cm, day};
      for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) h.values(x, y) = g.pixel(x, y)[0];
      return h;
    }
  }
  PruneHeatmap h = synthesize_heatmap(truth, state, hash_mix(cfg.seed, static_cast<std::uint64_t>(day), 0x4EA7), cfg.heatmap);
  h.day = day;
  return h;
}

DiskSet track(const CycleConfig& cfg, const SegmentationMask& mask, const DiskSet& prev, const GardenState& state) {
  switch (cfg.tracker) {
    case TrackerChoice::Bfs: return bfs_track(mask, prev, state, cfg.garden.catalog, cfg.tracking);
    case TrackerChoice::KMeans: return kmeans_track(mask, state, cfg.tracking);
    case TrackerChoice::Mixed: return mixed_track(mask, prev, state, cfg.garden.catalog, cfg.tracking);
  }
  throw Error(ErrorCode::InvalidInput, "unknown tracker");
}

}  // namespace

CycleSummary run_cycle(const CycleConfig& cfg) {
  cfg.validate();
  const auto& catalog = cfg.garden.catalog;
  const double ppc = cfg.garden.px_per_cm;
  Logs logs(cfg.out_dir);

  CycleSummary summary;
  summary.catalog = catalog;
  summary.tool = to_string(cfg.tool);
  summary.tracker = to_string(cfg.tracker);
  summary.seed = cfg.seed;

  GardenState state = cfg.garden.initial_state();
  DiskSet disks = initial_disks(state);
  RadiusHistory history;
  history.record(disks);

  for (int day = 1; day <= cfg.total_days; ++day) {
    const GardenState prev = state;
    state = advance_day(state, catalog);
    RenderedGarden truth = render_garden(state, ppc, hash_mix(cfg.seed, static_cast<std::uint64_t>(day)), cfg.render);
    const SegmentationMask mask = observe(cfg, truth, prev, day);

    disks = track(cfg, mask, disks, state);
    disks.day = day;
    history.record(disks);
    const CoverageReport report = coverage_report(mask, catalog);

    DailyRecord rec;
    rec.day = day;
    rec.total_coverage = report.total_coverage;
    rec.diversity = report.diversity;
    rec.per_type_coverage = report.per_type_coverage;
    rec.normalized_vector = report.normalized_vector;

    if (cfg.tool != ToolChoice::None && cfg.is_prune_day(day)) {
      std::vector<int> targets = select_plants_to_prune(report, disks, catalog, cfg.planner);
      if (cfg.max_actions_per_day > 0 && static_cast<int>(targets.size()) > cfg.max_actions_per_day)
        targets.resize(static_cast<std::size_t>(cfg.max_actions_per_day));
      rec.plants_selected = static_cast<int>(targets.size());

      const PruneHeatmap heatmap = heatmap_for(cfg, truth, state, day);
      const std::vector<PrunePointCandidate> candidates = extract_prune_points(heatmap, mask, disks, cfg.planner);
      GrayImage global = overhead_image(truth, catalog.type_count(), cfg.seed);

      for (int target : targets) {
        ActionRecord action;
        action.day = day;
        action.plant_index = target;
        action.status = "skipped";
        try {
          Vec2 point;
          std::optional<int> neighbor;
          double decay = 0.0;
          try {
            const PruneSelection sel = select_prune_point(candidates, disks, history, target, cfg.planner);
            point = sel.point.position;
            neighbor = sel.neighbor;
            decay = sel.decay_rate;
            action.method = "learned";
          } catch (const Error& e) {
            if (e.code() != ErrorCode::NoPrunePoint) throw;
            point = baseline_prune_point(mask, disks.disk(target));
            action.method = "baseline";
          }
          if (logs.enabled()) write_prune_log_row(logs.prune, day, target, point, neighbor, decay, action.method);

          const PlantState& plant = state.plant(target);
          CameraConfig cam_cfg = cfg.camera;
          cam_cfg.px_per_cm = ppc;
          cam_cfg.seed = hash_mix(cfg.seed, static_cast<std::uint64_t>(day), static_cast<std::uint64_t>(target));
          ServoConfig servo_cfg = cfg.servo;
          const GantryPose start{plant.center.x, plant.center.y, cam_cfg.reference_height};
          servo_cfg.search_radius = std::max(
              servo_cfg.search_radius, distance(plant.center, point) + cam_cfg.extent_cm(start.z) / 2.0 + 2.0);
          SimulatedCamera camera(global, cam_cfg);
          const ServoOutcome outcome = servo_loop(camera, global, start, point, ppc, servo_cfg);
          action.servo_status = to_string(outcome.status);
          action.servo_iterations = outcome.iterations;
          if (logs.enabled()) {
            char name[48];
            std::snprintf(name, sizeof name, "day_%03d_plant_%02d.csv", day, target);
            auto trace = open_out(logs.dir / "servo" / name);
            write_servo_trace(trace, outcome.trace);
          }
          if (outcome.status != ServoStatus::Converged) {
            ++rec.servo_failed;
            throw ServoFailure(std::string(to_string(outcome.status)) + ": " + outcome.detail);
          }
          ++rec.servo_converged;

          const Vec2 cut_at{outcome.pose.x, outcome.pose.y};
          const DepthReading depth =
              read_depth(state, outcome.pose, cfg.actuation.height_per_radius, cfg.actuation.sensor_height);
          const ToolCommand command = cfg.tool == ToolChoice::Shears
                                          ? shear_command(plant.center, cut_at, depth, cfg.actuation)
                                          : rotary_command(plant.center, cut_at, depth, cfg.actuation);
          const CutEffect effect = apply_cut(state, truth, cut_at, command.tool, cfg.actuation);
          global = overhead_image(truth, catalog.type_count(), cfg.seed);
          if (logs.enabled()) write_tool_log_row(logs.tools, day, effect.target, command, effect);
          action.status = "cut";
          ++rec.cuts_applied;
        } catch (const ServoFailure& e) {
          action.reason = e.what();
          ++rec.actions_skipped;
        } catch (const Error& e) {
          action.reason = e.what();
          ++rec.actions_skipped;
        }
        if (logs.enabled()) {
          logs.actions << day << ',' << target << ',' << action.method << ',' << action.status << ','
                       << action.servo_status << ',' << action.servo_iterations << ',' << csv_field(action.reason)
                       << '\n';
        }
        summary.actions.push_back(std::move(action));
      }
    }

    if (logs.enabled()) {
      write_disks_rows(logs.disks, disks);
      if (!state.plants.empty()) {
        logs.snapshots << (logs.first_snapshot ? "" : ",\n") << snapshot_records(state);
        logs.first_snapshot = false;
      }
    }
    summary.days.push_back(std::move(rec));
  }

  if (logs.enabled()) {
    logs.snapshots << "\n]\n";
    logs.daily << "day,total_coverage,diversity";
    for (const auto& t : catalog.types()) logs.daily << ",c_" << t.name;
    for (const auto& t : catalog.types()) logs.daily << ",v_" << t.name;
    logs.daily << ",plants_selected,cuts_applied,actions_skipped,servo_converged,servo_failed\n";
    for (const auto& r : summary.days) {
      logs.daily << r.day << ',' << fixed(r.total_coverage, 6) << ',' << fixed(r.diversity, 6);
      for (double c : r.per_type_coverage) logs.daily << ',' << fixed(c, 6);
      for (double v : r.normalized_vector) logs.daily << ',' << fixed(v, 6);
      logs.daily << ',' << r.plants_selected << ',' << r.cuts_applied << ',' << r.actions_skipped << ','
                 << r.servo_converged << ',' << r.servo_failed << '\n';
    }
    write_summary(logs.dir / "summary.json", summary);
    if (cfg.write_svg) {
      std::vector<int> day_axis;
      std::vector<double> cov, div;
      for (const auto& r : summary.days) {
        day_axis.push_back(r.day);
        cov.push_back(r.total_coverage);
        div.push_back(r.diversity);
      }
      auto svg = open_out(logs.dir / "metrics.svg");
      svg << svg_line_chart("coverage and diversity (" + summary.tool + ")", day_axis,
                            {{"coverage", cov}, {"diversity", div}});
    }
  }
  return summary;
}

std::optional<double> percent_change(double a, double b) {
  if (a == 0.0) return std::nullopt;
  return (b - a) / a * 100.0;
}

std::string format_percent(std::optional<double> percent) {
  if (!percent) return "N/A";
  const double r = std::round(*percent * 100.0) / 100.0;
  return (r > 0.0 ? "+" : "") + fixed(r, 2) + "%";
}

CycleComparison compare_cycles(const CycleSummary& a, const CycleSummary& b) {
  if (!(a.catalog == b.catalog)) throw Error(ErrorCode::CatalogMismatch, "summaries use different catalogs");
  if (a.days.size() != b.days.size())
    throw Error(ErrorCode::InvalidInput, "summaries cover different day ranges");
  CycleComparison cmp;
  for (std::size_t i = 0; i < a.days.size(); ++i) {
    const auto& da = a.days[i];
    const auto& db = b.days[i];
    if (da.day != db.day) throw Error(ErrorCode::InvalidInput, "summaries cover different day ranges");
    cmp.days.push_back({da.day, da.total_coverage, db.total_coverage, da.diversity, db.diversity});
  }
  if (a.days.empty()) return cmp;
  const auto& fa = a.final_day();
  const auto& fb = b.final_day();
  const auto types = a.catalog.types();
  if (fa.normalized_vector.size() != types.size() || fb.normalized_vector.size() != types.size())
    throw Error(ErrorCode::CatalogMismatch, "per-type vectors do not match the catalog");
  for (std::size_t i = 0; i < types.size(); ++i) {
    const double va = fa.normalized_vector[i], vb = fb.normalized_vector[i];
    cmp.types.push_back({types[i].type_id, types[i].name, va, vb, percent_change(va, vb)});
  }
  cmp.diversity_percent = percent_change(fa.diversity, fb.diversity);
  cmp.coverage_percent = percent_change(fa.total_coverage, fb.total_coverage);
  return cmp;
}

std::string comparison_table(const CycleComparison& cmp) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %12s\n", "type", "a", "b", "% change");
  out << line;
  for (const auto& t : cmp.types) {
    std::snprintf(line, sizeof line, "%-16s %10s %10s %12s\n", t.name.c_str(), fixed(t.a, 3).c_str(),
                  fixed(t.b, 3).c_str(), format_percent(t.percent).c_str());
    out << line;
  }
  if (!cmp.days.empty()) {
    const auto& f = cmp.days.back();
    std::snprintf(line, sizeof line, "%-16s %10s %10s %12s\n", "DIVERSITY", fixed(f.diversity_a, 3).c_str(),
                  fixed(f.diversity_b, 3).c_str(), format_percent(cmp.diversity_percent).c_str());
    out << line;
    std::snprintf(line, sizeof line, "%-16s %10s %10s %12s\n", "COVERAGE", fixed(f.coverage_a, 3).c_str(),
                  fixed(f.coverage_b, 3).c_str(), format_percent(cmp.coverage_percent).c_str());
    out << line;
  }
  return out.str();
}

std::string comparison_csv(const CycleComparison& cmp) {
  std::ostringstream out;
  out << "day,coverage_a,coverage_b,coverage_delta,diversity_a,diversity_b,diversity_delta\n";
  for (const auto& d : cmp.days) {
    out << d.day << ',' << fixed(d.coverage_a, 6) << ',' << fixed(d.coverage_b, 6) << ','
        << fixed(d.coverage_delta(), 6) << ',' << fixed(d.diversity_a, 6) << ',' << fixed(d.diversity_b, 6) << ','
        << fixed(d.diversity_delta(), 6) << '\n';
  }
  return out.str();
}

std::string summary_to_json(const CycleSummary& summary) {
  json j;
  j["tool"] = summary.tool;
  j["tracker"] = summary.tracker;
  j["seed"] = summary.seed;
  json types = json::array();
  for (const auto& t : summary.catalog.types()) {
    json e{{"type_id", t.type_id},
           {"name", t.name},
           {"germination_days", t.germination_days},
           {"maturation_days", t.maturation_days},
           {"max_radius_cm", t.max_radius},
           {"wilting_rate_cm_per_day", t.wilting_rate}};
    if (t.wilt_start_days) e["wilt_start_days"] = *t.wilt_start_days;
    types.push_back(e);
  }
  j["catalog"] = types;
  json days = json::array();
  for (const auto& d : summary.days) {
    days.push_back({{"day", d.day},
                    {"total_coverage", d.total_coverage},
                    {"diversity", d.diversity},
                    {"per_type_coverage", d.per_type_coverage},
                    {"normalized_vector", d.normalized_vector},
                    {"plants_selected", d.plants_selected},
                    {"cuts_applied", d.cuts_applied},
                    {"actions_skipped", d.actions_skipped},
                    {"servo_converged", d.servo_converged},
                    {"servo_failed", d.servo_failed}});
  }
  j["days"] = days;
  json actions = json::array();
  for (const auto& a : summary.actions) {
    actions.push_back({{"day", a.day},
                       {"plant_index", a.plant_index},
                       {"method", a.method},
                       {"status", a.status},
                       {"servo_status", a.servo_status},
                       {"servo_iterations", a.servo_iterations},
                       {"reason", a.reason}});
  }
  j["actions"] = actions;
  if (!summary.days.empty()) {
    j["final_coverage"] = summary.final_day().total_coverage;
    j["final_diversity"] = summary.final_day().diversity;
  }
  j["failure_rate"] = summary.failure_rate();
  return j.dump(2) + "\n";
}

CycleSummary summary_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    CycleSummary s;
    s.tool = j.value("tool", "");
    s.tracker = j.value("tracker", "");
    s.seed = j.value("seed", std::uint64_t{0});
    std::vector<PlantTypeParams> types;
    for (const auto& e : j.at("catalog")) {
      PlantTypeParams t;
      t.type_id = e.at("type_id").get<int>();
      t.name = e.at("name").get<std::string>();
      t.germination_days = e.at("germination_days").get<double>();
      t.maturation_days = e.at("maturation_days").get<double>();
      t.max_radius = e.at("max_radius_cm").get<double>();
      t.wilting_rate = e.at("wilting_rate_cm_per_day").get<double>();
      if (e.contains("wilt_start_days")) t.wilt_start_days = e.at("wilt_start_days").get<double>();
      types.push_back(t);
    }
    s.catalog = PlantTypeCatalog(std::move(types));
    for (const auto& d : j.at("days")) {
      DailyRecord r;
      r.day = d.at("day").get<int>();
      r.total_coverage = d.at("total_coverage").get<double>();
      r.diversity = d.at("diversity").get<double>();
      r.per_type_coverage = d.at("per_type_coverage").get<std::vector<double>>();
      r.normalized_vector = d.at("normalized_vector").get<std::vector<double>>();
      r.plants_selected = d.value("plants_selected", 0);
      r.cuts_applied = d.value("cuts_applied", 0);
      r.actions_skipped = d.value("actions_skipped", 0);
      r.servo_converged = d.value("servo_converged", 0);
      r.servo_failed = d.value("servo_failed", 0);
      s.days.push_back(std::move(r));
    }
    if (j.contains("actions")) {
      for (const auto& a : j.at("actions")) {
        s.actions.push_back({a.at("day").get<int>(), a.at("plant_index").get<int>(), a.value("method", ""),
                             a.value("status", ""), a.value("servo_status", ""), a.value("servo_iterations", 0),
                             a.value("reason", "")});
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("summary: ") + e.what());
  }
}

void write_summary(const std::filesystem::path& path, const CycleSummary& summary) {
  auto out = open_out(path);
  out << summary_to_json(summary);
}

CycleSummary read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open summary " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return summary_from_json(buf.str());
}

}  // namespace polyprune
