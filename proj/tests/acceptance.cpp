// Acceptance suite: one PASS/FAIL line per criterion.
//
// usage: acceptance <polyprune-cli> <example-config.json>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "polyprune/config.hpp"
#include "polyprune/cycle.hpp"
#include "polyprune/enclosing_disk.hpp"
#include "polyprune/error.hpp"
#include "polyprune/planner.hpp"
#include "polyprune/prior.hpp"
#include "polyprune/rng.hpp"
#include "polyprune/servoing.hpp"
#include "polyprune/tracking.hpp"

using namespace polyprune;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Per-type day-60 values of an unpruned and a pruned cycle, catalog order,
// with the expected percent changes.
constexpr double kCycle1L[] = {0.158, 0.085, 0.122, 0.105, 0.098, 0.034, 0.000, 0.062, 0.028, 0.002};
constexpr double kCycle1R[] = {0.102, 0.043, 0.076, 0.102, 0.121, 0.059, 0.057, 0.078, 0.095, 0.031};
const char* const kListedChange[] = {"-35.44%", "-49.41%", "-37.70%", "-2.86%", "+23.47%",
                                     "+73.53%", "N/A",     "+25.81%", "+239.29%", "+1450.00%"};

// Mask whose normalized vector is proportional to `v`: type i gets
// round(v_i R_i^2 K) pixels, so c_i (R / R_i)^2 is v_i up to rounding.
SegmentationMask mask_for_vector(const PlantTypeCatalog& catalog, const double* v) {
  const int side = 260;
  const double k = 100.0;
  SegmentationMask mask{Grid<std::uint8_t>(side, side, 0), 1.0};
  auto cells = mask.labels.values();
  std::size_t at = 0;
  for (const auto& t : catalog.types()) {
    const auto n = static_cast<std::size_t>(std::lround(v[t.type_id - 1] * t.max_radius * t.max_radius * k));
    for (std::size_t i = 0; i < n; ++i) cells[at++] = static_cast<std::uint8_t>(t.type_id);
  }
  return mask;
}

Outcome criterion_1() {
  const auto catalog = default_catalog();
  const auto mask_l = mask_for_vector(catalog, kCycle1L);
  const auto mask_r = mask_for_vector(catalog, kCycle1R);
  const auto t0 = Clock::now();
  const double dl = coverage_report(mask_l, catalog).diversity;
  const double ms_l = elapsed_ms(t0);
  const auto t1 = Clock::now();
  const double dr = coverage_report(mask_r, catalog).diversity;
  const double ms_r = elapsed_ms(t1);
  const bool ok = std::abs(dl - 0.856) <= 0.002 && std::abs(dr - 0.970) <= 0.002 && ms_l < 1.0 && ms_r < 1.0;
  return {ok, format("1L %.4f, 1R %.4f, %.3f/%.3f ms", dl, dr, ms_l, ms_r)};
}

CycleSummary table_column(const double* v, double coverage, double diversity) {
  CycleSummary s;
  s.catalog = default_catalog();
  DailyRecord d;
  d.day = 60;
  d.total_coverage = coverage;
  d.diversity = diversity;
  d.normalized_vector.assign(v, v + 10);
  s.days.push_back(d);
  return s;
}

Outcome criterion_2() {
  const auto cmp = compare_cycles(table_column(kCycle1L, 0.924, 0.856), table_column(kCycle1R, 0.784, 0.970));
  int matched = 0;
  std::string mismatches;
  for (std::size_t i = 0; i < cmp.types.size(); ++i) {
    const std::string got = format_percent(cmp.types[i].percent);
    if (got == kListedChange[i]) {
      ++matched;
    } else {
      mismatches += " " + cmp.types[i].name + "=" + got;
    }
  }
  const std::string div = format_percent(cmp.diversity_percent);
  const std::string cov = format_percent(cmp.coverage_percent);
  matched += div == "+13.32%";
  matched += cov == "-15.15%";
  const bool ok = matched == 12;
  return {ok, format("%d/12 entries, diversity %s, coverage %s%s", matched, div.c_str(), cov.c_str(),
                     mismatches.c_str())};
}

Outcome criterion_3() {
  const double alpha = 5.0;
  const int side = 100, channels = 4;
  Rng rng(303);
  long centers = 0, rims = 0, outside = 0, cells = 0;
  bool ok = true;
  for (int trial = 0; trial < 50 && ok; ++trial) {
    std::vector<PriorPlacement> placements;
    const int n = 1 + static_cast<int>(rng.below(8));
    for (int k = 0; k < n; ++k) {
      const Vec2 c{static_cast<double>(rng.below(side)) + 0.5, static_cast<double>(rng.below(side)) + 0.5};
      placements.push_back({c, 1 + static_cast<int>(rng.below(channels - 1)), 1.0 + rng.below(30)});
    }
    const auto grid = build_occupancy_grid(placements, {side, side, channels}, 1.0, alpha);
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        for (int c = 0; c < channels; ++c) {
          float expect = 1.0f;
          bool inside = false;
          bool at_center = false, at_rim = false, covered_elsewhere = false;
          for (const auto& p : placements) {
            if (p.type_id != c) continue;
            const double d = std::hypot(x + 0.5 - p.center.x, y + 0.5 - p.center.y);
            if (d > p.max_radius) continue;
            const auto v = static_cast<float>(alpha * (2.0 - d / p.max_radius));
            expect = inside ? std::max(expect, v) : v;
            inside = true;
            at_center = at_center || d == 0.0;
            at_rim = at_rim || d == p.max_radius;
            covered_elsewhere = covered_elsewhere || (d > 0.0 && d < p.max_radius);
          }
          const float got = grid(x, y, c);
          ++cells;
          if (got != expect) ok = false;
          if (at_center) {
            ++centers;
            if (got != 10.0f) ok = false;
          } else if (at_rim && !covered_elsewhere) {
            ++rims;
            if (got != 5.0f) ok = false;
          } else if (!inside) {
            ++outside;
            if (got != 1.0f) ok = false;
          }
        }
      }
    }
  }
  return {ok, format("50 grids, %ld cells; %ld centers=10, %ld rims=5, %ld outside=1", cells, centers, rims, outside)};
}

// R = 45 over 30 growth days: 1.5 cm/day.
PlantTypeCatalog big_catalog() { return PlantTypeCatalog({{1, "big", 1, 31, 45, 1.0, std::nullopt}}); }

Outcome criterion_4() {
  const auto catalog = big_catalog();
  const double rate = catalog.at(1).growth_per_day();
  Rng rng(404);
  int within = 0, over_bound = 0;
  const int trials = 200;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < trials; ++trial) {
    const double truth = rng.uniform(5, 40);
    const double prev_r = std::max(0.0, truth - rng.uniform(0, rate));
    auto state = oracle::single_plant(100, {rng.uniform(45, 55), rng.uniform(45, 55)}, truth);
    state.day = 20;
    const auto mask = render_mask(state, 2.0, hash_mix(404, trial));
    DiskSet prev = initial_disks(state);
    prev.disks[0].radius = prev_r;
    const double r = bfs_track(mask, prev, state, catalog, {}).disk(0).radius;
    within += std::abs(r - truth) <= 0.5;
    over_bound += r > std::min(catalog.at(1).max_radius, prev_r + rate) + 1e-12;
  }
  const double ms = elapsed_ms(t0);
  const bool ok = within >= 190 && over_bound == 0 && ms < 5000.0;
  return {ok, format("%d/%d within 0.5 cm, %d above bound, %.0f ms", within, trials, over_bound, ms)};
}

Outcome criterion_5() {
  Rng rng(505);
  const double ppc = 2.0, bed = 200.0;
  int good = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double r1 = rng.uniform(5, 30), r2 = rng.uniform(5, 30);
    const double sep = r1 + r2 + rng.uniform(0, 15);
    const double a = rng.uniform(0, 2 * kPi);
    const Vec2 dir{std::cos(a), std::sin(a)};
    const Vec2 mid{bed / 2 + rng.uniform(-10, 10), bed / 2 + rng.uniform(-10, 10)};
    const Vec2 c1 = mid - (sep / 2) * dir, c2 = mid + (sep / 2) * dir;
    GardenState truth;
    truth.day = 20;
    truth.bed_width = truth.bed_height = bed;
    truth.plants = {{0, 1, c1, r1, Stage::Growth, {}}, {1, 1, c2, r2, Stage::Growth, {}}};
    auto seeds = truth;
    for (auto& p : seeds.plants) p.center = p.center + Vec2{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto out = kmeans_track(render_mask(truth, ppc, hash_mix(505, trial)), seeds, {});
    const double e = std::max(distance(out.disk(0).center, c1), distance(out.disk(1).center, c2)) * ppc;
    worst = std::max(worst, e);
    good += e <= 2.0;
  }
  return {good == 100, format("%d/100 within 2 px, worst %.2f px", good, worst)};
}

Outcome criterion_6() {
  Rng rng(606);
  int matched = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(50));
    std::vector<Vec2> pts;
    const bool lattice = trial % 5 == 0;
    for (int i = 0; i < n; ++i) {
      if (lattice) {
        pts.push_back({static_cast<double>(rng.below(12)), static_cast<double>(rng.below(12))});
      } else {
        pts.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50)});
      }
    }
    const Circle fast = smallest_enclosing_disk(pts, hash_mix(606, trial));
    const Circle slow = oracle::brute_enclosing_disk(pts);
    const double err = std::abs(fast.radius - slow.radius);
    worst = std::max(worst, err);
    matched += err <= 1e-9 && oracle::encloses(fast, pts);
  }
  return {matched == 500, format("%d/500 sets, worst radius error %.2e", matched, worst)};
}

Outcome criterion_7() {
  Rng rng(707);
  const int side = 128, types = 3;
  int exact = 0, checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    GardenState s;
    s.day = 30;
    s.bed_width = s.bed_height = side;
    const int n = 1 + static_cast<int>(rng.below(8));
    for (int k = 0; k < n; ++k) {
      s.plants.push_back({k, 1 + static_cast<int>(rng.below(types)), {rng.uniform(0, side), rng.uniform(0, side)},
                          rng.uniform(2, 30), Stage::Growth, {}});
    }
    RenderOptions opts;
    opts.jitter_cm = rng.uniform(0, 2);
    const auto mask = render_mask(s, 1.0, hash_mix(707, trial), opts);
    DiskSet disks = initial_disks(s);
    for (auto& d : disks.disks) {
      d.center = d.center + Vec2{rng.uniform(-4, 4), rng.uniform(-4, 4)};
      d.radius = rng.below(6) == 0 ? 0.0 : s.plant(d.plant_index).radius * rng.uniform(0.6, 1.4);
    }
    for (int t = 1; t <= types; ++t) {
      checks += 2;
      exact += acu(disks, mask, t) == oracle::acu(disks, mask, t);
      exact += ppi(disks, mask, t) == oracle::ppi(disks, mask, t);
    }
  }
  return {exact == checks, format("%d/%d ACU/PPI values exact over 200 scenes", exact, checks)};
}

Outcome criterion_8() {
  Rng rng(808);
  int close = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Circle a{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(0.5, 10)};
    const double r = rng.uniform(0.5, 10);
    const double d = rng.uniform(0, a.radius + r);
    const double t = rng.uniform(0, 2 * kPi);
    const Circle b{a.center + d * Vec2{std::cos(t), std::sin(t)}, r};
    const double err = std::abs(circle_iou(a, b) - oracle::monte_carlo_iou(a, b, 1000000, hash_mix(808, trial)));
    worst = std::max(worst, err);
    close += err <= 1e-2;
  }
  const Circle u{{3, 4}, 2.5};
  const bool identical = circle_iou(u, u) == 1.0;
  const bool disjoint = circle_iou(u, Circle{{10, 4}, 3}) == 0.0 && circle_iou(u, Circle{{8.5, 4}, 3}) == 0.0;
  const bool ok = close == 50 && identical && disjoint;
  return {ok, format("%d/50 within 1e-2 (worst %.4f), identical %s, disjoint %s", close, worst,
                     identical ? "1.0" : "wrong", disjoint ? "0.0" : "wrong")};
}

Outcome criterion_9() {
  Rng rng(909);
  const double ppc = 1.0;
  int converged = 0, worst_iters = 0;
  double worst_step = 0.0, worst_err = 0.0;
  const int trials = 60;
  for (int trial = 0; trial < trials; ++trial) {
    const auto global = synthetic_texture(200, 200, hash_mix(909, trial));
    const Vec2 target{rng.uniform(50, 150), rng.uniform(50, 150)};
    const double offset = trial < 10 ? 20.0 : trial < 15 ? 0.0 : rng.uniform(0, 20);
    const double a = rng.uniform(0, 2 * kPi);
    const Vec2 start = target + offset * Vec2{std::cos(a), std::sin(a)};
    CameraConfig cam;
    cam.px_per_cm = ppc;
    SimulatedCamera camera(global, cam);
    ServoConfig cfg;
    cfg.search_radius = 20.0 + cam.extent_cm(cam.reference_height) / 2 + 2;
    const auto out = servo_loop(camera, global, {start.x, start.y, cam.reference_height}, target, ppc, cfg);
    if (out.status != ServoStatus::Converged || out.trace.empty()) continue;
    worst_iters = std::max(worst_iters, out.iterations);
    for (const auto& it : out.trace) worst_step = std::max(worst_step, it.step_len);
    const double err = distance(out.trace.back().localized, target);
    worst_err = std::max(worst_err, err);
    converged += out.iterations <= 6 && err <= 1.0;
  }

  int blur_failed = 0, blur_wrong = 0;
  const int blur_trials = 15;
  for (int trial = 0; trial < blur_trials; ++trial) {
    const auto global = synthetic_texture(200, 200, hash_mix(919, trial));
    const Vec2 target{rng.uniform(50, 150), rng.uniform(50, 150)};
    const double a = rng.uniform(0, 2 * kPi);
    const Vec2 start = target + rng.uniform(0, 20) * Vec2{std::cos(a), std::sin(a)};
    CameraConfig cam;
    cam.px_per_cm = ppc;
    cam.blur_sigma_px = 4.0 + 2.0 * (trial % 3);
    SimulatedCamera camera(global, cam);
    ServoConfig cfg;
    cfg.search_radius = 30.0;
    const auto out = servo_loop(camera, global, {start.x, start.y, cam.reference_height}, target, ppc, cfg);
    blur_failed += out.status == ServoStatus::LocalizationFailed;
    blur_wrong += out.status == ServoStatus::Converged && distance(Vec2{out.pose.x, out.pose.y}, target) > 1.0;
  }
  const bool ok = converged == trials && worst_step <= 4.0 + 1e-9 && blur_failed == blur_trials && blur_wrong == 0;
  return {ok, format("%d/%d converged (max %d iters, max step %.3f cm, max error %.3f cm); blur %d/%d "
                     "LocalizationFailed, %d wrong convergences",
                     converged, trials, worst_iters, worst_step, worst_err, blur_failed, blur_trials, blur_wrong)};
}

DiskSet make_disks(int day, const std::vector<std::pair<int, Circle>>& ds) {
  DiskSet set{day, {}};
  int k = 0;
  for (const auto& [type, c] : ds) set.disks.push_back({k++, type, c.center, c.radius, TrackerKind::Bfs});
  return set;
}

SegmentationMask filled(const DiskSet& disks, int side) {
  GardenState s;
  s.bed_width = s.bed_height = side;
  for (const auto& d : disks.disks) s.plants.push_back({d.plant_index, d.type_id, d.center, d.radius, Stage::Growth, {}});
  return render_mask(s, 1.0, 1);
}

Outcome criterion_10() {
  Rng rng(1010);
  const int side = 100;
  const PlannerConfig cfg;
  int selected = 0, edge_violations = 0, round_one = 0, below_threshold = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const double r = rng.uniform(4, 35);
    const Vec2 c{50, 50};
    const double a = rng.uniform(0, 2 * kPi);
    const double nr = rng.uniform(3, 12);
    const Vec2 nc = c + (r + nr * rng.uniform(-0.5, 1.0)) * Vec2{std::cos(a), std::sin(a)};
    const auto disks = make_disks(30, {{1, {c, r}}, {2, {nc, nr}}});
    const auto mask = filled(disks, side);
    PruneHeatmap heat{GrayImage(side, side, 0.0f), 1.0, 30};
    const int bumps = 1 + static_cast<int>(rng.below(10));
    for (int k = 0; k < bumps; ++k) {
      const double ba = rng.uniform(0, 2 * kPi), bd = rng.uniform(0, r);
      add_heatmap_bump(heat, c + bd * Vec2{std::cos(ba), std::sin(ba)}, rng.uniform(0.02, 1.0), rng.uniform(0.5, 2.0));
    }
    const auto candidates = extract_prune_points(heat, mask, disks, cfg);
    for (const auto& cand : candidates) {
      if (cand.round != 1) continue;
      ++round_one;
      below_threshold += cand.confidence < cfg.initial_threshold;
    }
    RadiusHistory history;
    history.record(0, 25, r * rng.uniform(0.8, 1.0));
    history.record(1, 25, nr * rng.uniform(0.8, 1.2));
    history.record(disks);
    try {
      const auto sel = select_prune_point(candidates, disks, history, 0, cfg);
      ++selected;
      edge_violations += r - distance(sel.point.position, c) < cfg.edge_margin;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoPrunePoint) throw;
    }
  }

  const auto disks = make_disks(30, {{1, {{50, 50}, 30}}});
  PruneHeatmap heat{GrayImage(side, side, 0.0f), 1.0, 30};
  add_heatmap_bump(heat, {40.5, 50.5}, 1.0, 1.0);
  add_heatmap_bump(heat, {60.5, 50.5}, 0.25, 1.0);
  const std::size_t two = extract_prune_points(heat, filled(disks, side), disks, cfg).size();

  const bool ok = edge_violations == 0 && below_threshold == 0 && two == 2 && selected > 0;
  return {ok, format("%d selections, %d within 3 cm of edge; %d round-1 candidates, %d below 0.3; "
                     "two-bump fixture %zu candidates",
                     selected, edge_violations, round_one, below_threshold, two)};
}

CycleConfig seeded_cycle(std::uint64_t seed, ToolChoice tool) {
  CycleConfig cfg;
  cfg.garden.px_per_cm = 1.0;
  cfg.garden.seed = seed;
  cfg.garden.placements = random_placements(cfg.garden.catalog, cfg.garden.bed_width, cfg.garden.bed_height, 2, seed);
  cfg.seed = seed;
  cfg.camera.px_per_cm = cfg.garden.px_per_cm;
  cfg.tool = tool;
  return cfg;
}

Outcome criterion_11(Clock::time_point suite_start) {
  const int runs = 20;
  std::map<ToolChoice, double> coverage, diversity;
  for (int seed = 1; seed <= runs; ++seed) {
    for (ToolChoice tool : {ToolChoice::None, ToolChoice::Shears, ToolChoice::Rotary}) {
      const auto summary = run_cycle(seeded_cycle(static_cast<std::uint64_t>(seed), tool));
      coverage[tool] += summary.final_day().total_coverage / runs;
      diversity[tool] += summary.final_day().diversity / runs;
    }
  }
  const double suite_s = elapsed_ms(suite_start) / 1000.0;
  const bool ok = diversity[ToolChoice::Shears] > diversity[ToolChoice::None] &&
                  coverage[ToolChoice::Shears] > coverage[ToolChoice::Rotary] && suite_s < 120.0;
  return {ok, format("day-60 diversity none %.4f shears %.4f; coverage shears %.4f rotary %.4f; suite %.1f s",
                     diversity[ToolChoice::None], diversity[ToolChoice::Shears], coverage[ToolChoice::Shears],
                     coverage[ToolChoice::Rotary], suite_s)};
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    out[fs::relative(entry.path(), root).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return out;
}

Outcome criterion_12(const std::string& cli, const std::string& config) {
  const fs::path work = fs::temp_directory_path() / "polyprune_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  std::vector<std::map<std::string, std::string>> outputs;
  for (const char* name : {"a", "b"}) {
    const fs::path out = work / name;
    const std::string cmd = "\"" + cli + "\" run --config \"" + config + "\" --seed 11 --out \"" + out.string() +
                            "\" > \"" + (work / (std::string(name) + ".log")).string() + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "run exited with an error: " + cmd};
    outputs.push_back(csv_files(out));
  }
  std::size_t bytes = 0;
  for (const auto& [_, text] : outputs[0]) bytes += text.size();
  const bool ok = !outputs[0].empty() && outputs[0] == outputs[1];
  fs::remove_all(work);
  return {ok, format("%zu CSV files, %zu bytes, %s", outputs[0].size(), bytes, ok ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <polyprune-cli> <config.json>\n");
    return 2;
  }
  const auto suite_start = Clock::now();
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"diversity reproduction", criterion_1},
      {"percent-change reproduction", criterion_2},
      {"occupancy-grid formula", criterion_3},
      {"BFS tracker oracle", criterion_4},
      {"K-Means tracker oracle", criterion_5},
      {"smallest-enclosing-disk exactness", criterion_6},
      {"ACU/PPI brute-force equivalence", criterion_7},
      {"circle IoU", criterion_8},
      {"servo contract", criterion_9},
      {"prune-point rules", criterion_10},
      {"directional end-to-end property", [&] { return criterion_11(suite_start); }},
      {"determinism", [&] { return criterion_12(argv[1], argv[2]); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %2zu  %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
