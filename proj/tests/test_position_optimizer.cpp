#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace ddgi;
using namespace testing_helpers;

namespace {

Scene solid(const Aabb& box) {
  Scene s;
  s.materials = {make_material({0.5, 0.5, 0.5})};
  s.static_triangles = make_box(box, 0);
  s.static_groups = {box};
  s.commit();
  return s;
}

bool inside_box(const Aabb& b, const Vec3& p) { return b.contains(p); }

}  // namespace

TEST(OptimizerIteration, PushesThroughClosestBackface) {
  ProbeRayStats st;
  st.rays_per_probe = 100;
  st.backface_count = 60;
  st.closest_backface = {{1, 0, 0}, 0.1};
  const Vec3 off = optimize_probe_iteration(st, {}, {1, 1, 1}, 0.45);
  EXPECT_NEAR(off.x, 0.45 - 0.1 * kOffsetEpsilon, 1e-12);
  EXPECT_EQ(off.y, 0.0);
}

TEST(OptimizerIteration, CannotReachBackfaceStays) {
  ProbeRayStats st;
  st.rays_per_probe = 100;
  st.backface_count = 60;
  st.closest_backface = {{1, 0, 0}, 0.6};
  EXPECT_EQ(optimize_probe_iteration(st, {0.1, 0, 0}, {1, 1, 1}, 0.45), Vec3(0.1, 0, 0));
}

TEST(OptimizerIteration, FewBackfacesSkipBackfaceBranch) {
  ProbeRayStats st;
  st.rays_per_probe = 100;
  st.backface_count = 10;
  st.closest_backface = {{1, 0, 0}, 0.1};
  EXPECT_EQ(optimize_probe_iteration(st, {}, {1, 1, 1}, 0.45), Vec3());
}

TEST(OptimizerIteration, CrowdedProbeStepsTowardFarthestFrontface) {
  ProbeRayStats st;
  st.rays_per_probe = 100;
  st.closest_frontface = {{0, -1, 0}, 0.05};
  st.farthest_frontface = {{0, 1, 0}, 3.0};
  EXPECT_EQ(optimize_probe_iteration(st, {}, {1, 1, 1}, 0.45), Vec3(0, 0.2, 0));
  st.farthest_frontface = {{0, 1, 0}, 0.1};
  EXPECT_EQ(optimize_probe_iteration(st, {}, {1, 1, 1}, 0.45), Vec3(0, 0.1, 0));
  st.farthest_frontface = {{0, 1, 0}, 3.0};
  EXPECT_EQ(optimize_probe_iteration(st, {0, 0.4, 0}, {1, 1, 1}, 0.45), Vec3(0, 0.45, 0));
}

TEST(OptimizerIteration, UncrowdedProbeStays) {
  ProbeRayStats st;
  st.rays_per_probe = 100;
  st.closest_frontface = {{0, -1, 0}, 1.5};
  st.farthest_frontface = {{0, 1, 0}, 3.0};
  EXPECT_EQ(optimize_probe_iteration(st, {}, {1, 1, 1}, 0.45), Vec3());
}

TEST(Optimizer, ProbeInThickWallEscapes) {
  const Aabb wall{{-3, -3, -3}, {0.1, 3, 3}};
  const Scene scene = solid(wall);
  const auto res = optimize_probe(scene, {0, 0, 0}, {}, {1, 1, 1}, 0.45, scene.static_groups, OptimizerOptions{});
  EXPECT_EQ(res.iterations, kOptimizerIterations);
  EXPECT_FALSE(res.stuck);
  EXPECT_FALSE(inside_box(wall, res.offset));
  for (int a = 0; a < 3; ++a) EXPECT_LE(std::abs(res.offset[a]), 0.45);
  const auto back = scene.ray_cast_static({res.offset, {-1, 0, 0}});
  ASSERT_TRUE(back);
  EXPECT_TRUE(back->frontface);
}

TEST(Optimizer, OpenSpaceStaysPut) {
  const Scene scene = solid({{20, 20, 20}, {21, 21, 21}});
  const auto res = optimize_probe(scene, {0, 0, 0}, {}, {1, 1, 1}, 0.45, scene.static_groups, OptimizerOptions{});
  EXPECT_EQ(res.offset, Vec3());
  EXPECT_FALSE(res.stuck);
}

TEST(Optimizer, DeepInsideBlockIsStuck) {
  const Scene scene = solid({{-3, -3, -3}, {3, 3, 3}});
  const auto res = optimize_probe(scene, {0, 0, 0}, {}, {1, 1, 1}, 0.45, scene.static_groups, OptimizerOptions{});
  EXPECT_TRUE(res.stuck);
  EXPECT_EQ(res.offset, Vec3());
}

TEST(Optimizer, NearFloorMovesAway) {
  const Scene scene = room_scene({{-1, -0.05, -1}, {1, 3, 1}}, make_material({0.5, 0.5, 0.5}));
  OptimizerOptions opt;
  opt.iterations = 1;
  const auto res = optimize_probe(scene, {0, 0, 0}, {}, {1, 1, 1}, 0.45, scene.static_groups, opt);
  // One step of min(0.2, d) toward the farthest frontface, an upper corner.
  EXPECT_NEAR(length(res.offset), 0.2, 1e-9);
  EXPECT_GT(res.offset.y, 0.15);
}

TEST(Optimizer, OffsetsStayWithinLimitAndAreDeterministic) {
  const ConfigDocument doc = presets::villa_corner();
  const Scene scene = build_scene(doc);
  ProbeVolume a(doc.run.volumes[0].desc), b(doc.run.volumes[0].desc);
  std::vector<Int3> all;
  for (int i = 0; i < a.probe_count(); ++i) all.push_back(a.logical_from_linear(i));
  const auto ra = run_position_optimization(a, scene, all, scene.static_groups, OptimizerOptions{});
  OptimizerOptions two_threads;
  two_threads.threads = 2;
  run_position_optimization(b, scene, all, scene.static_groups, two_threads);
  const Vec3 lim = a.offset_limit();
  for (const Int3& p : all) {
    const Vec3 o = a.record(p).offset;
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(o[k]), lim[k] * (1 + 1e-12));
    EXPECT_EQ(o, b.record(p).offset);
  }
  for (const auto& r : ra) EXPECT_EQ(r.iterations, 5);
}

TEST(Optimizer, NoThrashAfterEscaping) {
  // Probe starts inside a slab; once out it must not re-enter during the remaining iterations.
  const Aabb slab{{-3, -0.3, -3}, {3, 0.1, 3}};
  const Scene scene = solid(slab);
  Vec3 offset;
  bool escaped = false;
  for (int it = 0; it < kOptimizerIterations; ++it) {
    const auto st = gather_ray_stats(scene, offset, optimizer_rotation(it), 256);
    offset = optimize_probe_iteration(st, offset, {1, 1, 1}, 0.45);
    if (!slab.contains(offset)) escaped = true;
    if (escaped) {
      EXPECT_FALSE(slab.contains(offset)) << it;
    }
  }
  EXPECT_TRUE(escaped);
}

TEST(Optimizer, FastPathSkipsOnlyFarProbes) {
  const Scene scene = solid({{-3, -3, -3}, {0.1, 3, 3}});
  OptimizerOptions fast;
  fast.static_aabb_fast_path = true;
  for (const Vec3& pos : {Vec3{0, 0, 0}, Vec3{1.5, 0, 0}, Vec3{5, 0, 0}, Vec3{9, 9, 9}}) {
    const auto slow = optimize_probe(scene, pos, {}, {1, 1, 1}, 0.45, scene.static_groups, OptimizerOptions{});
    const auto quick = optimize_probe(scene, pos, {}, {1, 1, 1}, 0.45, scene.static_groups, fast);
    EXPECT_EQ(slow.offset, quick.offset);
    EXPECT_EQ(slow.stuck, quick.stuck);
  }
  EXPECT_EQ(optimize_probe(scene, {9, 9, 9}, {}, {1, 1, 1}, 0.45, scene.static_groups, fast).iterations, 0);
}

TEST(Optimizer, DisabledLeavesOffsetsButStillClassifies) {
  const Scene scene = solid({{-3, -3, -3}, {3, 3, 3}});
  OptimizerOptions off;
  off.enabled = false;
  const auto res = optimize_probe(scene, {0, 0, 0}, {}, {1, 1, 1}, 0.45, scene.static_groups, off);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_TRUE(res.stuck);
}

TEST(RayStats, CountsBackfacesInsideBox) {
  const Scene scene = solid({{-1, -1, -1}, {1, 1, 1}});
  const auto st = gather_ray_stats(scene, {0, 0, 0}, Rotation3{}, 64);
  EXPECT_EQ(st.backface_count, 64);
  EXPECT_DOUBLE_EQ(st.backface_fraction(), 1.0);
  EXPECT_NEAR(st.closest_backface.distance, 1.0, 0.2);
  EXPECT_FALSE(st.closest_frontface.valid());
}
