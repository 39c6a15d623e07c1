#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace ddgi;
using namespace testing_helpers;

namespace {

Camera looking(const Vec3& from, const Vec3& to) {
  Camera c;
  c.position = from;
  c.target = to;
  return c;
}

RendererSettings small(int w = 24, int h = 16) {
  RendererSettings s;
  s.width = w;
  s.height = h;
  s.threads = 1;
  return s;
}

Scene lit_box() {
  Scene s = room_scene({{-1, 0, -1}, {1, 2, 1}}, make_material({0.6, 0.5, 0.4}));
  Light l;
  l.position = {0.2, 1.7, 0.1};
  l.intensity = {2, 2, 2};
  s.lights = {l};
  return s;
}

}  // namespace

TEST(Camera, CenterRayLooksAtTarget) {
  const Camera c = looking({0, 0, 0}, {0, 0, -5});
  const Ray r = c.primary_ray(50, 50, 101, 101);
  EXPECT_NEAR(r.direction.z, -1.0, 1e-12);
  const Ray top = c.primary_ray(50, 0, 101, 101);
  EXPECT_GT(top.direction.y, 0.0);
}

TEST(FrameImage, RmsDifference) {
  FrameImage a(2, 1), b(2, 1);
  b.set(1, 0, {1, 1, 1});
  EXPECT_NEAR(rms_difference(a, b), std::sqrt(0.5), 1e-12);
  EXPECT_THROW(rms_difference(a, FrameImage(1, 1)), std::invalid_argument);
}

TEST(DeferredShade, EmissiveOnly) {
  Scene scene = room_scene({{-1, -1, -1}, {1, 1, 1}}, make_material({0, 0, 0}, {0.3, 0.4, 0.5}));
  const ShadeInputs in{&scene, nullptr, {}, {}, true};
  const GBufferPixel px = make_gbuffer_pixel(scene, {{0, 0, 0}, {0, 0, -1}});
  ASSERT_TRUE(px.hit);
  EXPECT_EQ(deferred_shade(px, in).radiance, Rgb(0.3, 0.4, 0.5));
}

TEST(DeferredShade, SkyAndBackfaces) {
  Scene scene;
  scene.environment = {0.1, 0.2, 0.3};
  scene.materials = {make_material({1, 1, 1}, {1, 1, 1})};
  scene.static_triangles = make_quad({-1, -1, -2}, {0, 2, 0}, {2, 0, 0}, 0);  // faces -z
  scene.commit();
  const ShadeInputs in{&scene, nullptr, {}, {}, true};
  EXPECT_EQ(deferred_shade(make_gbuffer_pixel(scene, {{0, 0, 0}, {0, 0, 1}}), in).radiance, scene.environment);
  const GBufferPixel back = make_gbuffer_pixel(scene, {{0, 0, 0}, {0, 0, -1}});
  ASSERT_TRUE(back.hit);
  EXPECT_FALSE(back.frontface);
  EXPECT_EQ(deferred_shade(back, in).radiance, Rgb());
}

TEST(DeferredShade, NoProbesIsDirectPlusEmissiveExactly) {
  const Scene scene = lit_box();
  DdgiRenderer r({}, small());
  const Camera cam = looking({0, 1, 0.9}, {0, 0.8, -1});
  const FrameImage img = r.render(scene, cam);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto hit = scene.ray_cast(cam.primary_ray(x, y, img.width, img.height));
      ASSERT_TRUE(hit);
      const Rgb want = direct_lighting(scene, hit->position, hit->normal, scene.material(0).albedo);
      const Rgb got = img.at(x, y);
      for (int c = 0; c < 3; ++c) EXPECT_EQ(got[c], static_cast<float>(want[c]));
    }
}

TEST(DeferredShade, FurnaceWithBlackAlbedoIgnoresProbes) {
  const Scene scene = room_scene({{-0.5, -0.5, -0.5}, {1.5, 1.5, 1.5}}, make_material({0, 0, 0}, {1, 1, 1}));
  std::vector<ProbeVolume> vols{ProbeVolume(grid({3, 3, 3}, {1, 1, 1}, {-0.5, -0.5, -0.5}))};
  fill_constant(vols[0], {7, 7, 7});
  const VolumeBlendSet set(vols);
  const ShadeInputs in{&scene, &set, {0.5, 0.5, 0.5}, {}, true};
  const auto px = make_gbuffer_pixel(scene, {{0.5, 0.5, 0.5}, normalize(Vec3{1, 0.3, 0.2})});
  const ShadeResult s = deferred_shade(px, in);
  EXPECT_EQ(s.radiance, Rgb(1, 1, 1));
  EXPECT_FALSE(s.flagged);
}

TEST(DeferredShade, IndirectIsAlbedoTimesProbeField) {
  const Scene scene = room_scene({{-1, -1, -1}, {1, 1, 1}}, make_material({0.5, 0.25, 1.0}));
  std::vector<ProbeVolume> vols{ProbeVolume(grid({4, 4, 4}, {1, 1, 1}, {-1.5, -1.5, -1.5}))};
  fill_constant(vols[0], {0.4, 0.4, 0.4});
  const VolumeBlendSet set(vols);
  const ShadeInputs in{&scene, &set, {}, {}, true};
  const ShadeResult s = deferred_shade(make_gbuffer_pixel(scene, {{0, 0, 0}, {0, -1, 0}}), in);
  EXPECT_NEAR(s.radiance.x, 0.2, 1e-5);
  EXPECT_NEAR(s.radiance.y, 0.1, 1e-5);
  EXPECT_NEAR(s.radiance.z, 0.4, 1e-5);
}

TEST(DeferredShade, MissingProbeCoverageFlagsPixel) {
  const Scene scene = room_scene({{-1, -1, -1}, {1, 1, 1}}, make_material({0.5, 0.5, 0.5}));
  std::vector<ProbeVolume> vols{ProbeVolume(grid({2, 2, 2}, {1, 1, 1}, {10, 10, 10}))};
  fill_constant(vols[0], {1, 1, 1});
  const VolumeBlendSet set(vols);
  const ShadeInputs in{&scene, &set, {}, {}, true};
  const ShadeResult s = deferred_shade(make_gbuffer_pixel(scene, {{0, 0, 0}, {0, -1, 0}}), in);
  EXPECT_TRUE(s.flagged);
  EXPECT_EQ(s.radiance, Rgb());
}

TEST(Glossy, NonGlossyContributesNothing) {
  const Scene scene = room_scene({{-1, -1, -1}, {1, 1, 1}}, make_material({0.5, 0.5, 0.5}));
  const ShadeInputs in{&scene, nullptr, {}, {}, true};
  const ShadeResult g = glossy_trace(make_gbuffer_pixel(scene, {{0, 0, 0}, {0, -1, 0}}), in);
  EXPECT_EQ(g.radiance, Rgb());
}

TEST(Glossy, LobeSamplesStayNearMirror) {
  EXPECT_EQ(sample_glossy_lobe({0, 0, 1}, 0.0, 0.3, 0.7), Vec3(0, 0, 1));
  EXPECT_NEAR(glossy_lobe_exponent(0.5), 6.0, 1e-12);
  for (const auto& [u1, u2] : glossy_sample_pattern(0.2)) {
    const Vec3 d = sample_glossy_lobe({0, 0, 1}, 0.2, u1, u2);
    EXPECT_NEAR(length(d), 1.0, 1e-12);
    EXPECT_GT(d.z, 0.8);
  }
  EXPECT_EQ(glossy_sample_pattern(0.0).size(), 1u);
  EXPECT_EQ(glossy_sample_pattern(0.3).size(), static_cast<std::size_t>(kGlossyLobeSamples));
}

namespace {

// Two facing mirrors (albedo 0, glossy g) in a constant probe field of radiance l.
struct MirrorPair {
  Scene scene;
  std::vector<ProbeVolume> vols;
  double g = 0.8, l = 0.6;

  MirrorPair() {
    scene.materials = {make_material({0, 0, 0}, {}, Rgb::splat(g)), make_material({0, 0, 0})};
    scene.static_triangles = make_quad({-1, -1, -1}, {2, 0, 0}, {0, 2, 0}, 0);  // faces +z
    const auto b = make_quad({-1, -1, 1}, {0, 2, 0}, {2, 0, 0}, 0);              // faces -z
    scene.static_triangles.insert(scene.static_triangles.end(), b.begin(), b.end());
    scene.commit();
    vols.emplace_back(grid({5, 5, 5}, {1, 1, 1}, {-2, -2, -2}));
    fill_constant(vols[0], Rgb::splat(l));
  }
};

}  // namespace

TEST(Glossy, SecondOrderInConstantField) {
  MirrorPair m;
  const VolumeBlendSet set(m.vols);
  ShadeInputs in{&m.scene, &set, {0, 0, 0.5}, {}, true};
  const Ray ray{{0, 0, 0.5}, {0, 0, -1}};
  const ShadeResult second = shade_glossy_hit(m.scene.ray_cast(ray), ray, in);
  EXPECT_NEAR(second.radiance.x, m.g * m.l, 1e-5);

  const GBufferPixel px = make_gbuffer_pixel(m.scene, ray);
  EXPECT_NEAR(deferred_shade(px, in).radiance.x, m.g * m.g * m.l, 1e-5);

  in.second_order_glossy = false;
  EXPECT_EQ(shade_glossy_hit(m.scene.ray_cast(ray), ray, in).radiance, Rgb());
  EXPECT_EQ(deferred_shade(px, in).radiance, Rgb());
}

TEST(Glossy, SecondOrderBoundedByBrightestTexel) {
  MirrorPair m;
  // Uneven field: brightest encoded texel decodes to 2.
  const float bright = static_cast<float>(std::pow(2.0, 1.0 / kIrradianceGamma));
  for (int p = 0; p < m.vols[0].probe_count(); p += 3) m.vols[0].irradiance().fill_tile(p, {bright, bright, bright});
  const VolumeBlendSet set(m.vols);
  const ShadeInputs in{&m.scene, &set, {0, 0, 0.5}, {}, true};
  for (double x = -0.8; x <= 0.8; x += 0.2) {
    const Ray ray{{x, 0.1, 0.5}, normalize(Vec3{0.1, 0.05, -1})};
    const ShadeResult s = shade_glossy_hit(m.scene.ray_cast(ray), ray, in);
    EXPECT_LE(s.radiance.x, m.g * 2.0 + 1e-6);
    EXPECT_GE(s.radiance.x, m.g * m.l - 1e-6);
  }
}

TEST(Renderer, DeterministicAcrossRunsAndThreads) {
  const ConfigDocument doc = presets::cornell();
  Scene scene = build_scene(doc);
  auto run = [&](int threads) {
    RendererSettings s = doc.run.renderer;
    s.width = 32;
    s.height = 32;
    s.threads = threads;
    DdgiRenderer r(doc.run.volumes, s);
    FrameImage img;
    for (int f = 0; f < 3; ++f) {
      FrameStats st;
      img = r.render_frame(scene, doc.script.camera_at(f), st);
    }
    return std::make_pair(img, r.volumes());
  };
  const auto a = run(1), b = run(1), c = run(3);
  EXPECT_TRUE(a.first == b.first);
  EXPECT_TRUE(a.first == c.first);
  EXPECT_TRUE(a.second == c.second);
}

TEST(Renderer, SeedChangesRayRotation) {
  const ConfigDocument doc = presets::cornell();
  const Scene scene = build_scene(doc);
  RendererSettings s = doc.run.renderer;
  s.threads = 1;
  DdgiRenderer a(doc.run.volumes, s);
  s.seed = 99;
  DdgiRenderer b(doc.run.volumes, s);
  a.step(scene, doc.script.camera.position);
  b.step(scene, doc.script.camera.position);
  EXPECT_FALSE(a.volumes() == b.volumes());
}

TEST(Renderer, StaticSceneSettles) {
  const ConfigDocument doc = presets::cornell();
  const Scene scene = build_scene(doc);
  RendererSettings s = doc.run.renderer;
  s.width = 24;
  s.height = 24;
  s.threads = 1;
  DdgiRenderer r(doc.run.volumes, s);
  const Camera cam = doc.script.camera;
  std::vector<double> deltas;
  FrameImage prev;
  for (int f = 0; f < 60; ++f) {
    FrameStats st;
    FrameImage img = r.render_frame(scene, cam, st);
    if (f > 0) deltas.push_back(rms_difference(img, prev));
    prev = std::move(img);
  }
  // After the first blend the per-frame change is bounded by the hysteresis-scaled ray noise.
  double mean = 0;
  for (float v : prev.rgb) mean += v / static_cast<double>(prev.rgb.size());
  for (std::size_t i = 20; i < deltas.size(); ++i) EXPECT_LT(deltas[i], 0.01 * mean) << i;
}

TEST(Renderer, StatsCountRays) {
  const ConfigDocument doc = presets::furnace();
  const Scene scene = build_scene(doc);
  RendererSettings s = doc.run.renderer;
  s.threads = 1;
  s.features.sleeping = false;
  DdgiRenderer r(doc.run.volumes, s);
  const FrameStats first = r.step(scene, doc.script.camera.position);
  EXPECT_EQ(first.optimizer_rays, 64LL * 6 * 256);
  EXPECT_EQ(first.update_rays, 64LL * 256);
  EXPECT_EQ(first.rays_traced, first.optimizer_rays + first.update_rays);
  EXPECT_EQ(first.state_counts[static_cast<std::size_t>(ProbeState::kVigilant)], 64);
  const FrameStats second = r.step(scene, doc.script.camera.position);
  EXPECT_EQ(second.optimizer_rays, 0);
  EXPECT_EQ(second.frame, 1);
}

TEST(Renderer, EventsIgnoredWithoutHeuristics) {
  VolumeSettings vs;
  vs.desc = grid({2, 2, 2}, {1, 1, 1}, {0, 0, 0});
  RendererSettings s = small();
  s.features.heuristics = false;
  DdgiRenderer r({vs}, s);
  r.raise_event(SceneEvent::kLargeLight);
  EXPECT_TRUE(r.hysteresis()[0].schedule().empty());
  s.features.heuristics = true;
  DdgiRenderer h({vs}, s);
  h.raise_event(SceneEvent::kLargeLight);
  EXPECT_EQ(h.hysteresis()[0].schedule().size(), 1u);
}

TEST(Reference, EmptySceneIsBlack) {
  Scene scene;
  scene.commit();
  const FrameImage img = reference_path_trace(scene, looking({0, 0, 0}, {0, 0, -1}), 8, 8, 4, 1, 1);
  for (float v : img.rgb) EXPECT_EQ(v, 0.f);
}

TEST(Reference, FurnaceIsOne) {
  const Scene scene = room_scene({{-1, -1, -1}, {1, 1, 1}}, make_material({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}));
  const ReferenceImage ref = reference_path_trace_with_variance(scene, looking({0, 0, 0}, {0, 0, -1}), 8, 8, 256, 3, 1);
  double mean = 0;
  for (float v : ref.image.rgb) mean += v / static_cast<double>(ref.image.rgb.size());
  EXPECT_NEAR(mean, 1.0, 0.02);
  const Rgb irr = reference_irradiance(scene, {0, -1, 0}, {0, 1, 0}, 4096, 5);
  EXPECT_NEAR(irr.x, 1.0, 0.03);
}

TEST(Reference, IrradianceOfUniformSkyIsItsRadiance) {
  Scene scene;
  scene.environment = {0.3, 0.3, 0.3};
  scene.commit();
  EXPECT_NEAR(reference_irradiance(scene, {0, 0, 0}, {0, 1, 0}, 64, 1).x, 0.3, 1e-12);
}

TEST(Reference, CornellVarianceGate) {
  const ConfigDocument doc = presets::cornell();
  const Scene scene = build_scene(doc);
  const ReferenceImage ref =
      reference_path_trace_with_variance(scene, doc.script.camera, 6, 6, 4096, 17, 0);
  for (float v : ref.variance_of_mean.rgb) EXPECT_LT(v, 1e-4);
}
