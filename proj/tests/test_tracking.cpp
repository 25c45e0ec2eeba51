#include <gtest/gtest.h>

#include "oracles.hpp"
#include "polyprune/enclosing_disk.hpp"
#include "polyprune/error.hpp"
#include "polyprune/rng.hpp"
#include "polyprune/tracking.hpp"

using namespace polyprune;

namespace {

// R = 45 over 30 growth days: 1.5 cm/day.
PlantTypeCatalog tracking_catalog() {
  return PlantTypeCatalog({{1, "big", 1, 31, 45, 1.0, std::nullopt},
                           {2, "small", 1, 31, 15, 1.0, std::nullopt},
                           {3, "mid", 1, 31, 30, 1.0, std::nullopt}});
}

GardenState scene(std::vector<std::pair<int, Circle>> plants, double bed = 100) {
  GardenState s;
  s.day = 10;
  s.bed_width = s.bed_height = bed;
  int k = 0;
  for (const auto& [type, c] : plants) {
    PlantState p;
    p.plant_index = k++;
    p.type_id = type;
    p.center = c.center;
    p.radius = c.radius;
    p.stage = Stage::Growth;
    s.plants.push_back(p);
  }
  return s;
}

DiskSet disks_with_radius(const GardenState& s, std::vector<double> radii) {
  DiskSet d = initial_disks(s);
  for (std::size_t i = 0; i < radii.size(); ++i) d.disks[i].radius = radii[i];
  return d;
}

}  // namespace

TEST(Bfs, CleanDiskRecovered) {
  const auto cat = tracking_catalog();
  const auto s = scene({{1, {{50, 50}, 20}}});
  const auto mask = render_mask(s, 2.0, 1);
  const auto prev = disks_with_radius(s, {18.8});
  const auto out = bfs_track(mask, prev, s, cat, {});
  EXPECT_NEAR(out.disk(0).radius, 20.0, 0.5);
  EXPECT_NEAR(out.disk(0).center.x, 50.0, 0.5);
}

TEST(Bfs, RadiusStaysWithinGrowthBounds) {
  const auto cat = tracking_catalog();
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double truth = rng.uniform(5, 40);
    const double prev_r = rng.uniform(0, 45);
    const auto s = scene({{1, {{50, 50}, truth}}});
    const auto out = bfs_track(render_mask(s, 2.0, 1), disks_with_radius(s, {prev_r}), s, cat, {});
    EXPECT_LE(out.disk(0).radius, std::min(45.0, prev_r + 1.5) + 1e-12);
    EXPECT_GE(out.disk(0).radius, std::max(0.0, prev_r - 1.0) - 1e-12);
  }
}

TEST(Bfs, AbsentTypeShrinksByWiltingRate) {
  const auto cat = tracking_catalog();
  const auto s = scene({{2, {{50, 50}, 10}}});
  const SegmentationMask empty{Grid<std::uint8_t>(200, 200, 0), 2.0};
  const auto out = bfs_track(empty, disks_with_radius(s, {10}), s, cat, {});
  EXPECT_DOUBLE_EQ(out.disk(0).radius, 9.0);
}

TEST(Bfs, DayZeroEmptyMaskIsAllZero) {
  const auto cat = tracking_catalog();
  const auto s = scene({{1, {{30, 30}, 0}}, {2, {{70, 70}, 0}}});
  const SegmentationMask empty{Grid<std::uint8_t>(100, 100, 0), 1.0};
  const auto out = bfs_track(empty, initial_disks(s), s, cat, {});
  for (const auto& d : out.disks) EXPECT_DOUBLE_EQ(d.radius, 0.0);
}

TEST(Bfs, MissingPreviousDisk) {
  const auto cat = tracking_catalog();
  const auto s = scene({{1, {{30, 30}, 5}}, {2, {{70, 70}, 5}}});
  DiskSet prev = initial_disks(s);
  prev.disks.pop_back();
  try {
    bfs_track(render_mask(s, 1.0, 1), prev, s, cat, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingDisk);
  }
}

TEST(KMeans, TwoSeparatedDisks) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const double r1 = rng.uniform(5, 15), r2 = rng.uniform(5, 15);
    const Vec2 c1{rng.uniform(20, 40), rng.uniform(20, 80)};
    const Vec2 c2{c1.x + r1 + r2 + rng.uniform(0, 20), rng.uniform(20, 80)};
    const auto truth = scene({{1, {c1, r1}}, {1, {c2, r2}}}, 120);
    auto seeds = truth;
    seeds.plants[0].center = c1 + Vec2{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    seeds.plants[1].center = c2 + Vec2{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const auto out = kmeans_track(render_mask(truth, 2.0, 1), seeds, {});
    EXPECT_LE(distance(out.disk(0).center, c1), 1.0);
    EXPECT_LE(distance(out.disk(1).center, c2), 1.0);
    EXPECT_EQ(out.disk(0).tracker, TrackerKind::KMeans);
  }
}

TEST(KMeans, SingleClusterIsEnclosingDisk) {
  const auto s = scene({{1, {{50, 50}, 12}}});
  const auto mask = render_mask(s, 1.0, 1);
  std::vector<Vec2> pts;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x)
      if (mask(x, y) == 1) pts.push_back(pixel_center_cm(x, y, 1.0));
  const Circle want = smallest_enclosing_disk(pts);
  const auto out = kmeans_track(mask, s, {});
  EXPECT_NEAR(out.disk(0).radius, want.radius, 1e-9);
  EXPECT_NEAR(out.disk(0).center.x, want.center.x, 1e-9);
}

TEST(KMeans, FragmentsSpannedByOneDisk) {
  // A big plant of another type splits the type-1 plant in two.
  const auto s = scene({{1, {{50, 50}, 15}}, {3, {{50, 50}, 20}}});
  auto mask = render_mask(scene({{1, {{50, 50}, 15}}}), 1.0, 1);
  for (int y = 0; y < 100; ++y)
    for (int x = 44; x < 56; ++x) mask(x, y) = mask(x, y) == 1 ? 3 : mask(x, y);
  const auto out = kmeans_track(mask, s, {});
  EXPECT_GT(out.disk(0).radius, 13.0);
  EXPECT_NEAR(out.disk(0).center.x, 50.0, 0.6);
}

TEST(KMeans, UnderpopulatedTypeReported) {
  const auto s = scene({{2, {{20, 20}, 0}}, {2, {{70, 70}, 0}}});
  SegmentationMask mask{Grid<std::uint8_t>(100, 100, 0), 1.0};
  mask(20, 20) = 2;
  std::vector<int> under;
  const auto out = kmeans_track(mask, s, {}, &under);
  EXPECT_EQ(under, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(out.disk(0).radius, 0.0);
}

TEST(Mixed, DegenerateSelectors) {
  const auto cat = tracking_catalog();
  const auto big = scene({{1, {{30, 30}, 10}}, {3, {{70, 70}, 10}}});
  const auto mask = render_mask(big, 1.0, 1);
  const auto prev = disks_with_radius(big, {9.5, 9.5});
  const auto mixed = mixed_track(mask, prev, big, cat, {});
  const auto km = kmeans_track(mask, big, {});
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(mixed.disk(k).center, km.disk(k).center);
    EXPECT_EQ(mixed.disk(k).radius, km.disk(k).radius);
  }
  const auto small = scene({{2, {{30, 30}, 10}}, {2, {{70, 70}, 10}}});
  const auto mask2 = render_mask(small, 1.0, 1);
  const auto prev2 = disks_with_radius(small, {9.5, 9.5});
  const auto mixed2 = mixed_track(mask2, prev2, small, cat, {});
  const auto bfs = bfs_track(mask2, prev2, small, cat, {});
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(mixed2.disk(k).center, bfs.disk(k).center);
    EXPECT_EQ(mixed2.disk(k).radius, bfs.disk(k).radius);
  }
}

TEST(Mixed, HandComputedSelectorTable) {
  const auto cat = tracking_catalog();
  // plant 0: big, visible            -> kmeans
  // plant 1: big type hidden in mask -> occluded -> bfs
  // plant 2: small, visible          -> below size threshold -> bfs
  // plant 3: mid R=30, visible       -> kmeans
  auto s = scene({{1, {{25, 25}, 10}}, {1, {{75, 75}, 10}}, {2, {{25, 75}, 10}}, {3, {{75, 25}, 10}}});
  const auto prev = disks_with_radius(s, {10, 10, 10, 10});
  auto mask = render_mask(s, 1.0, 1);
  // Hide plant 1 entirely: type 1 keeps half of its expected area.
  for (int y = 60; y < 90; ++y)
    for (int x = 60; x < 90; ++x) mask(x, y) = 0;
  EXPECT_NEAR(occlusion_estimate(mask, prev, s, 1), 0.5, 0.02);
  EXPECT_LT(occlusion_estimate(mask, prev, s, 3), 0.05);
  const auto sel = mixed_selection(mask, prev, s, cat, {});
  EXPECT_EQ(sel, (std::vector<bool>{false, false, false, true}));
  // Without the hidden plant the big type is no longer occluded.
  s.plants.erase(s.plants.begin() + 1);
  for (int k = 0; k < 3; ++k) s.plants[static_cast<std::size_t>(k)].plant_index = k;
  const auto prev3 = disks_with_radius(s, {10, 10, 10});
  EXPECT_EQ(mixed_selection(mask, prev3, s, cat, {}), (std::vector<bool>{true, false, true}));
}

TEST(Occlusion, NothingExpectedIsZero) {
  const auto s = scene({{1, {{25, 25}, 0}}});
  const SegmentationMask mask{Grid<std::uint8_t>(50, 50, 0), 1.0};
  EXPECT_DOUBLE_EQ(occlusion_estimate(mask, initial_disks(s), s, 1), 0.0);
}

TEST(Acu, PerfectFitAndSoil) {
  const auto s = scene({{1, {{50, 50}, 15}}});
  const auto mask = render_mask(s, 2.0, 1);
  DiskSet d = disks_with_radius(s, {15});
  EXPECT_NEAR(acu(d, mask, 1), 1.0, 0.02);
  EXPECT_DOUBLE_EQ(ppi(d, mask, 1), 1.0);
  d.disks[0].center = {90, 10};
  d.disks[0].radius = 5;
  EXPECT_DOUBLE_EQ(acu(d, mask, 1), 0.0);
  EXPECT_DOUBLE_EQ(ppi(d, mask, 1), 0.0);
}

TEST(Acu, HalfCoveredMatchesOracle) {
  const auto s = scene({{1, {{50, 50}, 15}}});
  const auto mask = render_mask(s, 2.0, 1);
  DiskSet d = disks_with_radius(s, {15});
  d.disks[0].center = {65, 50};
  EXPECT_DOUBLE_EQ(acu(d, mask, 1), oracle::acu(d, mask, 1));
  EXPECT_DOUBLE_EQ(ppi(d, mask, 1), oracle::ppi(d, mask, 1));
  EXPECT_GT(ppi(d, mask, 1), 0.2);
  EXPECT_LT(ppi(d, mask, 1), 0.6);
}

TEST(Acu, EmptyUnionAndEmptyType) {
  const auto s = scene({{1, {{50, 50}, 0}}});
  const SegmentationMask mask{Grid<std::uint8_t>(100, 100, 0), 1.0};
  EXPECT_DOUBLE_EQ(acu(initial_disks(s), mask, 1), 0.0);
  EXPECT_DOUBLE_EQ(ppi(initial_disks(s), mask, 1), 1.0);
}

TEST(Acu, RandomScenesMatchOracle) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<int, Circle>> ps;
    for (int k = 0; k < 5; ++k)
      ps.push_back({1 + static_cast<int>(rng.below(3)), {{rng.uniform(0, 64), rng.uniform(0, 64)}, rng.uniform(2, 20)}});
    const auto s = scene(ps, 64);
    const auto mask = render_mask(s, 2.0, 1);
    DiskSet d = initial_disks(s);
    for (auto& disk : d.disks) {
      disk.center = disk.center + Vec2{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      disk.radius = rng.uniform(0, 20);
    }
    for (int t = 1; t <= 3; ++t) {
      EXPECT_DOUBLE_EQ(acu(d, mask, t), oracle::acu(d, mask, t));
      EXPECT_DOUBLE_EQ(ppi(d, mask, t), oracle::ppi(d, mask, t));
    }
  }
}

TEST(CircleIou, ExactCases) {
  EXPECT_DOUBLE_EQ(circle_iou(Circle{{1, 2}, 3}, Circle{{1, 2}, 3}), 1.0);
  EXPECT_DOUBLE_EQ(circle_iou(Circle{{0, 0}, 1}, Circle{{5, 0}, 1}), 0.0);
  EXPECT_DOUBLE_EQ(circle_iou(Circle{{0, 0}, 1}, Circle{{2, 0}, 1}), 0.0);
  EXPECT_NEAR(circle_iou(Circle{{0, 0}, 2}, Circle{{0, 0}, 1}), 0.25, 1e-12);
  EXPECT_DOUBLE_EQ(circle_iou(Circle{{0, 0}, 0}, Circle{{0, 0}, 0}), 1.0);
  EXPECT_DOUBLE_EQ(circle_iou(Circle{{0, 0}, 0}, Circle{{1, 0}, 0}), 0.0);
}

TEST(CircleIou, UnitCirclesAtDistanceOne) {
  const Circle a{{0, 0}, 1}, b{{1, 0}, 1};
  const double lens = 2 * std::acos(0.5) - 0.5 * std::sqrt(3.0);
  EXPECT_NEAR(lens_area(a, b), lens, 1e-12);
  EXPECT_NEAR(circle_iou(a, b), oracle::monte_carlo_iou(a, b, 1000000, 7), 1e-2);
}
