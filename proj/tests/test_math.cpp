#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ddgi/math.hpp"

using namespace ddgi;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v;
  do v = {n(rng), n(rng), n(rng)};
  while (length(v) < 1e-9);
  return normalize(v);
}

}  // namespace

TEST(Octahedral, PlusZMapsToCenter) {
  const OctUV uv = octa_encode(UnitVec3({0, 0, 1}));
  EXPECT_DOUBLE_EQ(uv.u, 0.5);
  EXPECT_DOUBLE_EQ(uv.v, 0.5);
}

TEST(Octahedral, MinusZMapsToACorner) {
  const OctUV uv = octa_encode(UnitVec3({0, 0, -1}));
  EXPECT_TRUE(uv.u == 0.0 || uv.u == 1.0);
  EXPECT_TRUE(uv.v == 0.0 || uv.v == 1.0);
}

TEST(Octahedral, DecodeCenterIsPlusZ) {
  const UnitVec3 d = octa_decode({0.5, 0.5});
  EXPECT_EQ(d.vec(), Vec3(0, 0, 1));
}

TEST(Octahedral, AxisRoundTripsExactly) {
  for (const Vec3 axis : {Vec3{0, -1, 0}, Vec3{0, 1, 0}, Vec3{1, 0, 0}, Vec3{-1, 0, 0}, Vec3{0, 0, -1}}) {
    const Vec3 back = octa_decode(octa_encode(UnitVec3(axis))).vec();
    EXPECT_EQ(back, axis) << axis.x << ' ' << axis.y << ' ' << axis.z;
  }
}

TEST(Octahedral, DecodeRejectsOutOfRange) {
  EXPECT_THROW(octa_decode({1.5, 0.5}), std::out_of_range);
  EXPECT_THROW(octa_decode({0.5, -0.1}), std::out_of_range);
}

TEST(Octahedral, RoundTripMillionDirections) {
  std::mt19937_64 rng(7);
  double worst = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const Vec3 d = random_unit(rng);
    worst = std::max(worst, angle_between(d, octa_decode(octa_encode(UnitVec3(d))).vec()));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Octahedral, DecodeGridIsUnitLength) {
  for (int i = 0; i < 256; ++i)
    for (int j = 0; j < 256; ++j) {
      const Vec3 d = octa_decode({i / 255.0, j / 255.0}).vec();
      ASSERT_NEAR(length(d), 1.0, 1e-6);
    }
}

TEST(TexelDirection, MatchesDecodeOfTexelCenter) {
  const Vec3 a = texel_direction(3, 3, 8).vec();
  const Vec3 b = octa_decode({0.4375, 0.4375}).vec();
  EXPECT_EQ(a, b);
}

TEST(TexelDirection, CentralTexelsSymmetricAboutPlusZ) {
  const Vec3 a = texel_direction(7, 7, 16).vec();
  const Vec3 b = texel_direction(8, 8, 16).vec();
  EXPECT_NEAR(a.x, -b.x, 1e-15);
  EXPECT_NEAR(a.y, -b.y, 1e-15);
  EXPECT_NEAR(a.z, b.z, 1e-15);
  EXPECT_GT(a.z, 0.9);
}

TEST(TexelDirection, CoversBothHemispheres) {
  int lower = 0, upper = 0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) (texel_direction(x, y, 8).z() < 0 ? lower : upper)++;
  EXPECT_GE(lower, 1);
  EXPECT_GE(upper, 1);
}

TEST(TexelDirection, RejectsBorderCoordinates) {
  EXPECT_THROW(texel_direction(-1, 0, 8), std::out_of_range);
  EXPECT_THROW(texel_direction(0, 8, 8), std::out_of_range);
}

TEST(SphericalFibonacci, SinglePointOnEquator) {
  EXPECT_DOUBLE_EQ(spherical_fibonacci(0, 1).z(), 0.0);
}

TEST(SphericalFibonacci, BalancedAndDistinct) {
  const int n = 256;
  std::vector<Vec3> pts;
  Vec3 mean;
  for (int i = 0; i < n; ++i) {
    pts.push_back(spherical_fibonacci(i, n).vec());
    mean += pts.back() / n;
    ASSERT_NEAR(length(pts.back()), 1.0, 1e-12);
  }
  EXPECT_LT(length(mean), 0.02);
  double min_angle = 10;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) min_angle = std::min(min_angle, angle_between(pts[i], pts[j]));
  EXPECT_GT(min_angle, 0.0);
}

TEST(SphericalFibonacci, ZFollowsStratifiedFormula) {
  const int n = 64;
  for (int i = 0; i < n; ++i) EXPECT_NEAR(spherical_fibonacci(i, n).z(), 1.0 - (2.0 * i + 1.0) / n, 1e-12);
}

TEST(RandomRotation, DeterministicProperRotation) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Rotation3 a = random_rotation(s), b = random_rotation(s);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_NEAR(a.determinant(), 1.0, 1e-6);
    const Rotation3 i = a * a.transposed();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(i.rows[r][c], r == c ? 1.0 : 0.0, 1e-12);
  }
}

TEST(RandomRotation, UniformOverSeeds) {
  Vec3 mean;
  const int n = 10'000;
  for (int s = 0; s < n; ++s) mean += (random_rotation(static_cast<std::uint64_t>(s)) * Vec3{0, 0, 1}) / n;
  EXPECT_LT(length(mean), 0.05);
}

TEST(FrameRotation, DependsOnFrameAndVolume) {
  EXPECT_NE(frame_rotation(1, 0, 0).rows, frame_rotation(1, 1, 0).rows);
  EXPECT_NE(frame_rotation(1, 0, 0).rows, frame_rotation(1, 0, 1).rows);
  EXPECT_EQ(frame_rotation(1, 5, 2).rows, frame_rotation(1, 5, 2).rows);
}

TEST(UnitVec3, RejectsNonUnitInput) {
  EXPECT_THROW(UnitVec3({1, 1, 0}), std::invalid_argument);
  EXPECT_NO_THROW(UnitVec3::normalized({1, 1, 0}));
}

TEST(CosineHemisphere, MeanCosineIsTwoThirds) {
  // E[cos] under a cosine-weighted pdf = integral cos^2 / integral cos = 2/3.
  SplitMix64 g(3);
  const Vec3 n = normalize(Vec3{0.3, -0.5, 0.8});
  double sum = 0;
  const int count = 200'000;
  for (int i = 0; i < count; ++i) {
    const Vec3 d = sample_cosine_hemisphere(n, g.uniform(), g.uniform());
    ASSERT_GE(dot(d, n), -1e-12);
    sum += dot(d, n);
  }
  EXPECT_NEAR(sum / count, 2.0 / 3.0, 3e-3);
}
