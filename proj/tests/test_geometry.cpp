#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparsetrack/geometry.hpp"
#include "support.hpp"

using namespace sparsetrack;
using sparsetrack::fixtures::random_unit;
using sparsetrack::fixtures::unit_vector;
using sparsetrack::fixtures::make_detection;

namespace {

BoundingBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-50.0, 50.0), size(1.0, 40.0);
  return {pos(rng), pos(rng), size(rng), size(rng)};
}

Detection det_at(BoundingBox b) { return make_detection(1, b, unit_vector(2, 0)); }

}  // namespace

TEST(Iou, IdenticalBoxesGiveOne) {
  const BoundingBox b{3, 4, 10, 20};
  EXPECT_DOUBLE_EQ(iou(b, b), 1.0);
}

TEST(Iou, DisjointBoxesGiveZero) { EXPECT_DOUBLE_EQ(iou({0, 0, 1, 1}, {5, 5, 1, 1}), 0.0); }

TEST(Iou, HalfShiftedSquare) {
  EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0, 1e-12);
}

TEST(Iou, TouchingEdgesDoNotOverlap) { EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0); }

TEST(Iou, RandomPairsAreSymmetricBoundedAndTranslationInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
  for (int k = 0; k < 2000; ++k) {
    const BoundingBox a = random_box(rng), b = random_box(rng);
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    const double tx = shift(rng), ty = shift(rng);
    const BoundingBox a2{a.x + tx, a.y + ty, a.w, a.h}, b2{b.x + tx, b.y + ty, b.w, b.h};
    EXPECT_NEAR(v, iou(a2, b2), 1e-9);
    if (!(a == b)) EXPECT_LT(v, 1.0);
  }
}

TEST(BoundingBoxCheck, RejectsDegenerateAndNonFinite) {
  EXPECT_THROW(require_valid({0, 0, 0, 5}), std::invalid_argument);
  EXPECT_THROW(require_valid({0, 0, 5, -1}), std::invalid_argument);
  EXPECT_THROW(require_valid({NAN, 0, 5, 5}), std::invalid_argument);
  EXPECT_THROW(require_valid({0, INFINITY, 5, 5}), std::invalid_argument);
  EXPECT_NO_THROW(require_valid({-3, -4, 1, 1}));
}

TEST(MaxOverlap, EmptyListIsZero) { EXPECT_DOUBLE_EQ(max_overlap(det_at({0, 0, 10, 10}), {}), 0.0); }

TEST(MaxOverlap, SameBoxIsOne) {
  const std::vector<Detection> others{det_at({0, 0, 10, 10})};
  EXPECT_DOUBLE_EQ(max_overlap(det_at({0, 0, 10, 10}), others), 1.0);
}

TEST(MaxOverlap, TakesTheLargestOverlap) {
  const std::vector<Detection> others{det_at({5, 0, 10, 10}), det_at({100, 100, 10, 10})};
  EXPECT_NEAR(max_overlap(det_at({0, 0, 10, 10}), others), 1.0 / 3.0, 1e-12);
}

TEST(MaxOverlap, InFrameVariantExcludesTheDetectionItself) {
  const std::vector<Detection> frame{det_at({0, 0, 10, 10}), det_at({5, 0, 10, 10}),
                                     det_at({200, 0, 10, 10})};
  EXPECT_NEAR(max_overlap_in_frame(frame, 0), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(max_overlap_in_frame(frame, 2), 0.0);
}

TEST(FeatureDistance, ReferenceValues) {
  const Feature e1 = unit_vector(3, 0), e2 = unit_vector(3, 1);
  EXPECT_DOUBLE_EQ(feature_distance(e1, e1), 0.0);
  EXPECT_DOUBLE_EQ(feature_distance(e1, Feature(-e1)), 2.0);
  EXPECT_NEAR(feature_distance(e1, e2), std::sqrt(2.0), 1e-15);
}

TEST(FeatureDistance, DimensionMismatchThrows) {
  EXPECT_THROW(feature_distance(unit_vector(3, 0), unit_vector(4, 0)), std::invalid_argument);
}

TEST(FeatureDistance, TriangleInequalityOnRandomTriples) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const Feature a = random_unit(8, rng), b = random_unit(8, rng), c = random_unit(8, rng);
    EXPECT_LE(feature_distance(a, c), feature_distance(a, b) + feature_distance(b, c) + 1e-12);
    const double d = feature_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0 + 1e-12);
  }
}

TEST(FeatureDistance, OrderMatchesCosineDistance) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const Feature a = random_unit(6, rng), b = random_unit(6, rng), c = random_unit(6, rng);
    const bool by_euclid = feature_distance(a, b) < feature_distance(a, c);
    const bool by_cosine = a.dot(b) > a.dot(c);
    EXPECT_EQ(by_euclid, by_cosine);
  }
}

TEST(Normalized, ZeroVectorHasNoDirection) {
  EXPECT_FALSE(normalized(Feature::Zero(4)).has_value());
  const auto n = normalized(Feature::Constant(4, 2.0));
  ASSERT_TRUE(n.has_value());
  EXPECT_NEAR(n->norm(), 1.0, 1e-15);
}
