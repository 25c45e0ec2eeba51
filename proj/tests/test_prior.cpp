#include <gtest/gtest.h>

#include "oracles.hpp"
#include "polyprune/error.hpp"
#include "polyprune/prior.hpp"
#include "polyprune/rng.hpp"

using namespace polyprune;

namespace {

LikelihoodGrid random_likelihood(int h, int w, int c, Rng& rng, int levels = 0) {
  LikelihoodGrid l(h, w, c);
  for (float& v : l.values())
    v = levels > 0 ? static_cast<float>(rng.below(static_cast<std::uint64_t>(levels))) : static_cast<float>(rng.uniform());
  return l;
}

}  // namespace

TEST(Occupancy, FormulaValues) {
  const std::vector<PriorPlacement> p{{{50.5, 50.5}, 1, 10.0}};
  const auto o = build_occupancy_grid(p, {100, 100, 2}, 1.0, 5.0);
  EXPECT_EQ(o(50, 50, 1), 10.0f);
  EXPECT_EQ(o(60, 50, 1), 5.0f);
  EXPECT_EQ(o(50, 45, 1), 7.5f);
  EXPECT_EQ(o(61, 50, 1), 1.0f);
  EXPECT_EQ(o(50, 50, 0), 1.0f);
}

TEST(Occupancy, SameTypeOverlapTakesMax) {
  const std::vector<PriorPlacement> p{{{40.5, 50.5}, 1, 10.0}, {{44.5, 50.5}, 1, 10.0}};
  const auto o = build_occupancy_grid(p, {100, 100, 2}, 1.0, 5.0);
  EXPECT_EQ(o(44, 50, 1), 10.0f);
  EXPECT_EQ(o(40, 50, 1), 10.0f);
  EXPECT_EQ(o(42, 50, 1), 9.0f);
}

TEST(Occupancy, BoundedValuesOverRandomPlacements) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PriorPlacement> p;
    for (int k = 0; k < 8; ++k)
      p.push_back({{rng.uniform(0, 100), rng.uniform(0, 100)}, 1 + static_cast<int>(rng.below(3)), rng.uniform(1, 30)});
    const auto o = build_occupancy_grid(p, {100, 100, 4}, 1.0, 5.0);
    for (float v : o.values()) EXPECT_TRUE(v == 1.0f || (v >= 5.0f && v <= 10.0f));
  }
}

TEST(Occupancy, CenterOutsideGridIsOutOfBounds) {
  const std::vector<PriorPlacement> p{{{120, 10}, 1, 5.0}};
  try {
    build_occupancy_grid(p, {100, 100, 2}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
  }
}

TEST(Fusion, IdentityPrior) {
  Rng rng(1);
  const auto l = random_likelihood(8, 9, 4, rng);
  EXPECT_EQ(apply_prior(l, OccupancyGrid(8, 9, 4, 1.0f)).values()[17], l.values()[17]);
  const auto fused = apply_prior(l, OccupancyGrid(8, 9, 4, 1.0f));
  EXPECT_TRUE(std::equal(fused.values().begin(), fused.values().end(), l.values().begin()));
}

TEST(Fusion, ShapeMismatch) {
  EXPECT_THROW(apply_prior(LikelihoodGrid(2, 2, 3), OccupancyGrid(2, 2, 4)), Error);
}

TEST(Fusion, HandMultiplicationFlipsLabel) {
  LikelihoodGrid l(1, 1, 3);
  l(0, 0, 0) = 0.2f;
  l(0, 0, 1) = 0.5f;
  l(0, 0, 2) = 0.3f;
  OccupancyGrid o(1, 1, 3, 1.0f);
  o(0, 0, 2) = 2.0f;
  EXPECT_EQ(argmax_label(l)(0, 0), 1);
  const auto f = apply_prior(l, o);
  EXPECT_FLOAT_EQ(f(0, 0, 2), 0.6f);
  EXPECT_EQ(argmax_label(f)(0, 0), 2);
}

TEST(Fusion, UniformLikelihoodFollowsPrior) {
  const std::vector<PriorPlacement> p{{{20, 20}, 1, 8}, {{30, 25}, 2, 12}};
  const auto o = build_occupancy_grid(p, {50, 50, 3}, 1.0);
  const auto f = apply_prior(LikelihoodGrid(50, 50, 3, 0.25f), o);
  EXPECT_EQ(argmax_label(f).labels, argmax_label(o).labels);
}

TEST(Argmax, TieResolvesToLowerChannel) {
  LikelihoodGrid l(1, 1, 5, 0.1f);
  l(0, 0, 2) = l(0, 0, 4) = 0.7f;
  EXPECT_EQ(argmax_label(l)(0, 0), 2);
}

TEST(Argmax, OneHotRecoversIndex) {
  Rng rng(2);
  LikelihoodGrid l(10, 10, 6, 0.0f);
  Grid<std::uint8_t> want(10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      const int c = static_cast<int>(rng.below(6));
      l(x, y, c) = 1.0f;
      want(x, y) = static_cast<std::uint8_t>(c);
    }
  EXPECT_EQ(argmax_label(l).labels, want);
}

TEST(Argmax, MatchesBruteForceScan) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto l = random_likelihood(20, 30, 5, rng, trial % 2 ? 3 : 0);
    EXPECT_EQ(argmax_label(l).labels, oracle::argmax(l));
  }
}

TEST(MeanIou, Identity) {
  SegmentationMask m{Grid<std::uint8_t>(4, 4, 1), 1.0};
  m(0, 0) = 2;
  EXPECT_DOUBLE_EQ(mean_iou(m, m, 5), 1.0);
}

TEST(MeanIou, DisjointLabelsUseAbsentConvention) {
  SegmentationMask pred{Grid<std::uint8_t>(4, 4, 1), 1.0}, truth{Grid<std::uint8_t>(4, 4, 2), 1.0};
  for (int x = 0; x < 4; ++x) pred(x, 0) = 3;
  // Labels 1, 2, 3 present with IoU 0; labels 0 and 4 absent count as 1.
  EXPECT_DOUBLE_EQ(mean_iou(pred, truth, 4), 2.0 / 5.0);
}

TEST(MeanIou, MatchesBruteForce) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    SegmentationMask a{Grid<std::uint8_t>(16, 16), 1.0}, b{Grid<std::uint8_t>(16, 16), 1.0};
    for (auto& v : a.labels.values()) v = static_cast<std::uint8_t>(rng.below(3));
    for (auto& v : b.labels.values()) v = static_cast<std::uint8_t>(rng.below(3));
    EXPECT_DOUBLE_EQ(mean_iou(a, b, 4), oracle::mean_iou(a, b, 4));
  }
}

TEST(MeanIou, HalfOverlap) {
  SegmentationMask a{Grid<std::uint8_t>(4, 4, 0), 1.0}, b{Grid<std::uint8_t>(4, 4, 0), 1.0};
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 2; ++x) a(x, y) = 1;
  for (int y = 0; y < 4; ++y)
    for (int x = 1; x < 3; ++x) b(x, y) = 1;
  const auto iou = per_label_iou(a, b, 1);
  EXPECT_DOUBLE_EQ(iou[1], 4.0 / 12.0);
  EXPECT_DOUBLE_EQ(iou[0], 4.0 / 12.0);
  EXPECT_DOUBLE_EQ(mean_iou(a, b, 1), oracle::mean_iou(a, b, 1));
}
