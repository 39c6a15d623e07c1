#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace ddgi;

namespace {

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

json minimal() {
  return json::parse(R"({
    "materials": [{"name": "white", "albedo": [0.7, 0.7, 0.7]}],
    "lights": [{"name": "lamp", "position": [0, 1, 0], "intensity": [1, 1, 1]}],
    "geometry": [{"type": "room", "min": [-1, 0, -1], "max": [1, 2, 1], "material": "white"}],
    "volumes": [{"counts": [3, 3, 3], "spacing": [1, 1, 1], "origin": [-1, 0, -1]}],
    "camera": {"position": [0, 1, 0.9], "target": [0, 1, -1]},
    "script": {"frames": 4}
  })");
}

}  // namespace

TEST(Config, MinimalDocumentUsesDefaults) {
  const ConfigDocument doc = parse_config(minimal());
  ASSERT_EQ(doc.run.volumes.size(), 1u);
  const VolumeSettings& v = doc.run.volumes[0];
  EXPECT_EQ(v.rays_per_probe, kDefaultRaysPerProbe);
  EXPECT_EQ(v.alpha_irradiance, kDefaultIrradianceHysteresis);
  EXPECT_EQ(v.self_shadow_bias, kDefaultSelfShadowBias);
  EXPECT_EQ(v.gamma, kIrradianceGamma);
  EXPECT_EQ(doc.script.frames, 4);
  EXPECT_TRUE(doc.run.renderer.features.sleeping);
  const Scene scene = build_scene(doc);
  EXPECT_EQ(scene.static_triangles.size(), 12u);
  EXPECT_EQ(scene.static_groups.size(), 1u);
}

TEST(Config, UnknownKeysReportTheirPath) {
  json j = minimal();
  j["volumes"][0]["spacingg"] = 1;
  EXPECT_EQ(error_path(j), "/volumes/0/spacingg");
  j = minimal();
  j["render"] = {{"widht", 3}};
  EXPECT_EQ(error_path(j), "/render/widht");
  j = minimal();
  j["bogus"] = true;
  EXPECT_EQ(error_path(j), "/bogus");
}

TEST(Config, InvalidValuesAreRejected) {
  json j = minimal();
  j["volumes"][0]["spacing"] = {1, -1, 1};
  EXPECT_EQ(error_path(j), "/volumes/0/spacing");
  j = minimal();
  j["volumes"][0]["counts"] = {1, 3, 3};
  EXPECT_EQ(error_path(j), "/volumes/0/counts");
  j = minimal();
  j["volumes"][0]["alpha_irradiance"] = 1.0;
  EXPECT_EQ(error_path(j), "/volumes/0/alpha_irradiance");
  j = minimal();
  j["volumes"][0]["offset_limit"] = 0.5;
  EXPECT_EQ(error_path(j), "/volumes/0/offset_limit");
  j = minimal();
  j["materials"][0]["glossy"] = {0.5, 0.5, 0.5};
  EXPECT_EQ(error_path(j), "/materials/0/glossy");
  j = minimal();
  j["geometry"][0]["material"] = "missing";
  EXPECT_NE(error_path(j), "<no error>");
  j = minimal();
  j["script"]["events"] = json::parse(R"([{"frame": 1, "type": "huge_light"}])");
  EXPECT_EQ(error_path(j), "/script/events/0/type");
  j = minimal();
  j["script"]["events"] = json::parse(R"([{"frame": 1, "type": "small_light", "lights": [{"light": "sun"}]}])");
  EXPECT_EQ(error_path(j), "/script/events/0/lights/0/light");
  j = minimal();
  j["volumes"][0]["counts"] = {3.5, 3, 3};
  EXPECT_EQ(error_path(j), "/volumes/0/counts/0");
}

TEST(Config, ZeroBiasIsAccepted) {
  json j = minimal();
  j["volumes"][0]["self_shadow_bias"] = 0.0;
  EXPECT_EQ(parse_config(j).run.volumes[0].self_shadow_bias, 0.0);
}

TEST(Config, RoundTripsEveryPreset) {
  for (const std::string& name : presets::names()) {
    const ConfigDocument doc = presets::by_name(name);
    const json j = serialize_config(doc);
    const ConfigDocument back = parse_config(j);
    EXPECT_TRUE(back == doc) << name;
    EXPECT_EQ(serialize_config(back), j) << name;
  }
}

TEST(Config, ScriptInterpolatesKeysAndFiresEvents) {
  json j = minimal();
  j["objects"] = json::parse(R"([{"name": "crate",
      "geometry": [{"type": "box", "min": [-0.1, 0, -0.1], "max": [0.1, 0.2, 0.1], "material": "white"}]}])");
  j["script"] = json::parse(R"({"frames": 10,
      "camera_keys": [{"frame": 0, "position": [0, 1, 0.9]}, {"frame": 4, "position": [0.4, 1, 0.9]}],
      "object_tracks": [{"object": "crate", "keys": [{"frame": 2, "position": [0, 0, 0]},
                                                     {"frame": 6, "position": [0.4, 0, 0]}]}],
      "events": [{"frame": 3, "type": "large_light", "lights": [{"light": "lamp", "enabled": false}]}]})");
  const ConfigDocument doc = parse_config(j);
  EXPECT_NEAR(doc.script.camera_at(2).position.x, 0.2, 1e-12);
  EXPECT_NEAR(doc.script.camera_at(9).position.x, 0.4, 1e-12);

  Scene scene = build_scene(doc);
  EXPECT_TRUE(apply_frame(scene, doc.script, 0).empty());
  apply_frame(scene, doc.script, 4);
  EXPECT_NEAR(scene.objects[0].transform.translation.x, 0.2, 1e-12);
  Scene fresh = build_scene(doc);
  const auto events = apply_frame(fresh, doc.script, 3);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0], SceneEvent::kLargeLight);
  EXPECT_FALSE(fresh.lights[0].enabled);

  j["script"]["camera_keys"][1]["frame"] = 0;
  EXPECT_EQ(error_path(j), "/script/camera_keys/1");
}

TEST(Config, LoadsObjRelativeToConfigFile) {
  const auto dir = std::filesystem::temp_directory_path() / "ddgi_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream obj(dir / "tri.obj");
    obj << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2/1 4/2 3/3\n";
  }
  json j = minimal();
  j["geometry"].push_back({{"type", "obj"}, {"path", "tri.obj"}, {"material", "white"}, {"scale", 2.0}});
  {
    std::ofstream cfg(dir / "scene.json");
    cfg << j.dump(2);
  }
  const ConfigDocument doc = load_config((dir / "scene.json").string());
  const Scene scene = build_scene(doc);
  EXPECT_EQ(scene.static_triangles.size(), 14u);
  EXPECT_EQ(scene.static_triangles.back().v1, Vec3(2, 2, 0));
  std::filesystem::remove_all(dir);
}

TEST(Obj, RejectsMalformedFaces) {
  std::istringstream bad("v 0 0 0\nv 1 0 0\nf 1 2 7\n");
  EXPECT_THROW(parse_obj(bad, 0), std::runtime_error);
  std::istringstream quad("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n# comment\n");
  EXPECT_EQ(parse_obj(quad, 0).size(), 2u);
}

TEST(ImageIo, PfmRoundTripIsExact) {
  FrameImage img(3, 2);
  img.set(0, 0, {0.1, 2.5, -1});
  img.set(2, 1, {1e-7, 3e5, 0.333});
  const auto path = (std::filesystem::temp_directory_path() / "ddgi_roundtrip.pfm").string();
  write_pfm(path, img);
  EXPECT_TRUE(read_pfm(path) == img);
  std::filesystem::remove(path);
}
