#include <gtest/gtest.h>

#include <random>

#include "ddgi/bvh.hpp"
#include "ddgi/config.hpp"
#include "ddgi/geometry.hpp"
#include "ddgi/presets.hpp"
#include "oracles.hpp"

using namespace ddgi;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return normalize(Vec3{n(rng), n(rng), n(rng)});
}

void expect_matches_brute_force(const Scene& scene, const std::vector<Triangle>& tris, const Ray& ray) {
  const auto got = scene.ray_cast(ray);
  const auto want = oracle::brute_force_cast(tris, ray.origin, ray.direction, kRayEpsilon, Scene::kInfinity);
  ASSERT_EQ(got.has_value(), want.has_value());
  if (!got) return;
  EXPECT_NEAR(got->t, want->t, 1e-6 * std::max(1.0, want->t));
  EXPECT_EQ(got->frontface, want->frontface);
}

}  // namespace

TEST(Bvh, SingleTriangleMatchesDirectIntersection) {
  const Triangle tri{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const Bvh bvh({tri});
  EXPECT_EQ(bvh.leaf_count(), 1u);
  const Ray ray{{0.2, 0.2, 1}, {0, 0, -1}};
  const auto hit = bvh.ray_cast(ray, Scene::kInfinity);
  const auto direct = intersect_triangle(ray, tri, kRayEpsilon, Scene::kInfinity);
  ASSERT_TRUE(hit && direct);
  EXPECT_DOUBLE_EQ(hit->t, *direct);
  EXPECT_TRUE(hit->frontface);
}

TEST(Bvh, RandomSoupAgreesWithBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5), small(-0.4, 0.4);
  std::vector<Triangle> tris;
  for (int i = 0; i < 10'000; ++i) {
    const Vec3 c{u(rng), u(rng), u(rng)};
    tris.push_back({c, c + Vec3{small(rng), small(rng), small(rng)}, c + Vec3{small(rng), small(rng), small(rng)}});
  }
  Scene scene;
  scene.static_triangles = tris;
  scene.commit();
  int hits = 0;
  for (int i = 0; i < 1'000; ++i) {
    const Ray ray{{u(rng), u(rng), u(rng)}, random_unit(rng)};
    expect_matches_brute_force(scene, tris, ray);
    hits += scene.ray_cast(ray).has_value();
  }
  EXPECT_GT(hits, 100);
}

TEST(Bvh, DegenerateTrianglesAreIgnored) {
  std::vector<Triangle> tris{{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}},
                             {{-1, -1, 2}, {1, -1, 2}, {0, 1, 2}}};
  Scene scene;
  scene.static_triangles = tris;
  scene.commit();
  const auto hit = scene.ray_cast({{0.5, 0, -1}, {0, 0, 1}});
  ASSERT_TRUE(hit);
  EXPECT_DOUBLE_EQ(hit->t, 3.0);
  EXPECT_TRUE(std::isfinite(hit->normal.x));
  EXPECT_FALSE(scene.ray_cast({{1, 0, -1}, {0, 1, 0}}).has_value());
}

TEST(Bvh, AllDegenerateThrows) {
  EXPECT_THROW(Bvh({Triangle{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}}), std::invalid_argument);
}

TEST(Scene, EmptySceneMisses) {
  Scene scene;
  scene.commit();
  EXPECT_FALSE(scene.ray_cast({{0, 0, 0}, {1, 0, 0}}).has_value());
  EXPECT_FALSE(scene.occluded({{0, 0, 0}, {1, 0, 0}}, 10));
}

TEST(RayCast, InsideRoomHitsWallFrontface) {
  Scene scene;
  scene.static_triangles = make_room({{-2, -2, -2}, {2, 2, 2}}, 0);
  scene.commit();
  const auto hit = scene.ray_cast({{0, 0, 0}, {1, 0, 0}});
  ASSERT_TRUE(hit);
  EXPECT_DOUBLE_EQ(hit->t, 2.0);
  EXPECT_TRUE(hit->frontface);
}

TEST(RayCast, InsideSolidBoxSeesBackface) {
  Scene scene;
  scene.static_triangles = make_box({{-1, -1, -1}, {1, 1, 1}}, 0);
  scene.commit();
  const auto inside = scene.ray_cast({{0.5, 0, 0}, {1, 0, 0}});
  ASSERT_TRUE(inside);
  EXPECT_FALSE(inside->frontface);
  EXPECT_NEAR(inside->t, 0.5, 1e-12);
  const auto outside = scene.ray_cast({{-3, 0, 0}, {1, 0, 0}});
  ASSERT_TRUE(outside);
  EXPECT_TRUE(outside->frontface);
}

TEST(RayCast, VillaSceneAgreesWithBruteForce) {
  const ConfigDocument doc = presets::villa_corner();
  const Scene scene = build_scene(doc);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.4, 4.4), uy(-0.4, 2.4);
  for (int i = 0; i < 2'000; ++i) {
    const Ray ray{{u(rng), uy(rng), u(rng)}, random_unit(rng)};
    expect_matches_brute_force(scene, scene.static_triangles, ray);
  }
}

TEST(RayCast, OccludedRespectsTMax) {
  Scene scene;
  scene.static_triangles = make_quad({-1, -1, 2}, {2, 0, 0}, {0, 2, 0}, 0);
  scene.commit();
  EXPECT_TRUE(scene.occluded({{0, 0, 0}, {0, 0, 1}}, 3.0));
  EXPECT_FALSE(scene.occluded({{0, 0, 0}, {0, 0, 1}}, 1.5));
}

TEST(Geometry, QuadFacesAlongEdgeCross) {
  const auto q = make_quad({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 0);
  for (const auto& t : q) EXPECT_GT(normalize(t.geometric_normal()).z, 0.999);
}

TEST(Geometry, RoomFacesInwardBoxFacesOutward) {
  const Aabb b{{-1, -1, -1}, {1, 1, 1}};
  for (const auto& t : make_room(b, 0)) EXPECT_LT(dot(t.geometric_normal(), (t.v0 + t.v1 + t.v2) / 3.0), 0.0);
  for (const auto& t : make_box(b, 0)) EXPECT_GT(dot(t.geometric_normal(), (t.v0 + t.v1 + t.v2) / 3.0), 0.0);
}

namespace {
DynamicObject unit_cube() {
  DynamicObject obj;
  obj.mesh.triangles = make_box({{-1, -1, -1}, {1, 1, 1}}, 0);
  return obj;
}
}  // namespace

TEST(ExtendedAabb, CellPlusBias) {
  const Aabb b = extended_aabb(unit_cube(), {1, 1, 1}, 0.225);
  for (int a = 0; a < 3; ++a) {
    EXPECT_DOUBLE_EQ(b.lo[a], -2.225);
    EXPECT_DOUBLE_EQ(b.hi[a], 2.225);
  }
}

TEST(ExtendedAabb, HalfUnitCubeExample) {
  DynamicObject obj;
  obj.mesh.triangles = make_box({{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}, 0);
  const Aabb b = extended_aabb(obj, {1, 1, 1}, 0.225);
  for (int a = 0; a < 3; ++a) {
    EXPECT_DOUBLE_EQ(b.lo[a], -1.725);
    EXPECT_DOUBLE_EQ(b.hi[a], 1.725);
  }
}

TEST(ExtendedAabb, ZeroGrowthIsIdentity) {
  const DynamicObject obj = unit_cube();
  const Aabb b = extended_aabb(obj, {0, 0, 0}, 0.0);
  EXPECT_EQ(b.lo, obj.world_aabb().lo);
  EXPECT_EQ(b.hi, obj.world_aabb().hi);
}

TEST(ExtendedAabb, AnisotropicSpacing) {
  const Aabb b = extended_aabb(unit_cube(), {1, 2, 3}, 0.0);
  EXPECT_EQ(b.lo, Vec3(-2, -3, -4));
  EXPECT_EQ(b.hi, Vec3(2, 3, 4));
}

TEST(ExtendedAabb, FollowsTransform) {
  DynamicObject obj = unit_cube();
  obj.transform.translation = {5, 0, 0};
  const Aabb b = extended_aabb(obj, {1, 1, 1}, 0.0);
  EXPECT_EQ(b.lo, Vec3(3, -2, -2));
  EXPECT_THROW(extended_aabb(obj, {-1, 1, 1}, 0.0), std::invalid_argument);
}

TEST(Scene, DynamicObjectsMoveOnCommit) {
  Scene scene;
  scene.materials = {Material{}};
  scene.objects.push_back(unit_cube());
  scene.commit();
  const Ray ray{{0, 0, -5}, {0, 0, 1}};
  ASSERT_TRUE(scene.ray_cast(ray));
  EXPECT_EQ(scene.ray_cast(ray)->object, 0);
  EXPECT_FALSE(scene.ray_cast_static(ray));
  scene.objects[0].transform.translation = {10, 0, 0};
  scene.commit();
  EXPECT_FALSE(scene.ray_cast(ray));
}
