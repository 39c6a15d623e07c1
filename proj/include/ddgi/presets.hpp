#pragma once

// Built-in procedural scenes, expressed as ordinary config documents.

#include <stdexcept>
#include <string>
#include <vector>

#include "ddgi/config.hpp"

namespace ddgi::presets {

inline Material material(std::string name, const Rgb& albedo, const Rgb& emissive = {},
                         const Rgb& glossy = {}, double roughness = 0.0) {
  Material m;
  m.name = std::move(name);
  m.albedo = albedo;
  m.emissive = emissive;
  m.glossy_reflectance = glossy;
  m.roughness = roughness;
  return m;
}

inline PrimitiveDesc room(const Vec3& lo, const Vec3& hi, std::string mat) {
  PrimitiveDesc p;
  p.type = "room";
  p.min = lo;
  p.max = hi;
  p.material = std::move(mat);
  return p;
}

inline PrimitiveDesc box(const Vec3& lo, const Vec3& hi, std::string mat) {
  PrimitiveDesc p = room(lo, hi, std::move(mat));
  p.type = "box";
  return p;
}

inline PrimitiveDesc quad(const Vec3& corner, const Vec3& e1, const Vec3& e2, std::string mat) {
  PrimitiveDesc p;
  p.type = "quad";
  p.corner = corner;
  p.edge1 = e1;
  p.edge2 = e2;
  p.material = std::move(mat);
  return p;
}

inline Light point_light(std::string name, const Vec3& pos, const Rgb& intensity) {
  Light l;
  l.name = std::move(name);
  l.position = pos;
  l.intensity = intensity;
  return l;
}

inline VolumeSettings volume(std::string name, const Int3& counts, const Vec3& spacing, const Vec3& origin) {
  VolumeSettings v;
  v.desc.name = std::move(name);
  v.desc.counts = counts;
  v.desc.spacing = spacing;
  v.desc.origin = origin;
  return v;
}

/// Closed box glowing with radiance 1 and absorbing everything: every probe direction sees exactly 1.
inline ConfigDocument furnace() {
  ConfigDocument d;
  d.scene.materials = {material("glow", {0, 0, 0}, {1, 1, 1})};
  d.scene.geometry = {room({-0.5, -0.5, -0.5}, {3.5, 3.5, 3.5}, "glow")};
  d.run.volumes = {volume("furnace", {4, 4, 4}, {1, 1, 1}, {0, 0, 0})};
  d.run.renderer.width = 64;
  d.run.renderer.height = 48;
  d.script.frames = 160;
  d.script.camera.position = {1.5, 1.5, 3.2};
  d.script.camera.target = {1.5, 1.5, 0};
  return d;
}

/// Reference furnace: emission 0.5 and albedo 0.5 converge to radiance 1 everywhere.
inline ConfigDocument reference_furnace() {
  ConfigDocument d = furnace();
  d.scene.materials = {material("glow", {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5})};
  return d;
}

/// Closed diffuse box with colored side walls, two blocks and a point light under the ceiling.
inline ConfigDocument cornell() {
  ConfigDocument d;
  d.scene.materials = {material("white", {0.73, 0.73, 0.73}), material("red", {0.63, 0.065, 0.05}),
                       material("green", {0.14, 0.45, 0.091})};
  PrimitiveDesc walls = room({-1, 0, -1}, {1, 2, 1}, "white");
  walls.faces = {{"-x", "red"}, {"+x", "green"}};
  d.scene.geometry = {walls, box({-0.7, 0, -0.6}, {-0.1, 1.2, 0.0}, "white"),
                      box({0.15, 0, -0.1}, {0.7, 0.6, 0.45}, "white")};
  d.scene.lights = {point_light("ceiling", {0, 1.5, 0}, {2.5, 2.5, 2.5})};
  d.run.volumes = {volume("cornell", {8, 8, 8}, {2.2 / 7, 2.2 / 7, 2.2 / 7}, {-1.1, -0.1, -1.1})};
  d.run.renderer.width = 96;
  d.run.renderer.height = 96;
  d.script.frames = 120;
  d.script.camera.position = {0, 1, 0.99};
  d.script.camera.target = {0, 1, -1};
  d.script.camera.fov_y_degrees = 70;
  return d;
}

/// Two closed rooms sharing a wall at x = 2; only the left room is lit.
inline ConfigDocument two_room() {
  ConfigDocument d;
  d.scene.materials = {material("white", {0.7, 0.7, 0.7})};
  // The divider is thinner than a probe cell and swallows the probe plane at x = 2.5.
  d.scene.geometry = {room({0, 0, 0}, {4, 2, 2}, "white"), box({2.46, 0, 0}, {2.54, 2, 2}, "white")};
  d.scene.lights = {point_light("lamp", {1.0, 1.2, 1.0}, {3, 3, 3})};
  d.run.volumes = {volume("rooms", {6, 4, 4}, {1, 1, 1}, {-0.5, -0.5, -0.5})};
  d.run.renderer.width = 128;
  d.run.renderer.height = 64;
  d.script.frames = 100;
  d.script.camera.position = {1.2, 1, 1.95};
  d.script.camera.target = {3, 1, 0};
  d.script.camera.fov_y_degrees = 90;
  return d;
}

/// Lit room under a thin ceiling; above it a closed, unlit crawl space topped by a thick roof
/// that swallows a whole layer of grid probes unless they are relocated.
inline ConfigDocument villa_corner() {
  ConfigDocument d;
  d.scene.materials = {material("plaster", {0.7, 0.7, 0.7})};
  d.scene.geometry = {room({-0.5, -0.5, -0.5}, {4.5, 1.05, 4.5}, "plaster"),
                      room({-0.5, 1.3, -0.5}, {4.5, 1.7, 4.5}, "plaster"),
                      box({-0.5, 1.7, -0.5}, {4.5, 2.5, 4.5}, "plaster")};
  d.scene.lights = {point_light("lamp", {2, 0.3, 2}, {3, 3, 3})};
  d.run.volumes = {volume("villa", {5, 3, 5}, {1, 1, 1}, {0, 0, 0})};
  d.run.renderer.width = 64;
  d.run.renderer.height = 48;
  d.script.frames = 60;
  d.script.camera.position = {2, 1.5, 4.3};
  d.script.camera.target = {2, 1.5, 0};
  return d;
}

/// Open street: ground, a row of buildings and open sky. Surfaces sit on half-cell coordinates.
inline ConfigDocument street() {
  ConfigDocument d;
  d.scene.materials = {material("asphalt", {0.3, 0.3, 0.3}), material("facade", {0.6, 0.55, 0.5})};
  d.scene.environment = {0.4, 0.5, 0.7};
  d.scene.geometry = {quad({-0.5, 0.5, -0.5}, {0, 0, 12}, {12, 0, 0}, "asphalt"),
                      box({0.5, 0.5, 0.5}, {3.5, 4.5, 4.5}, "facade"), box({0.5, 0.5, 6.5}, {3.5, 3.5, 10.5}, "facade"),
                      box({7.5, 0.5, 0.5}, {10.5, 5.5, 3.5}, "facade"), box({7.5, 0.5, 5.5}, {10.5, 2.5, 10.5}, "facade")};
  d.scene.lights = {Light{}};
  d.scene.lights[0].name = "sun";
  d.scene.lights[0].kind = Light::Kind::kDirectional;
  d.scene.lights[0].direction = {0.4, -1.0, 0.3};
  d.scene.lights[0].intensity = {2.5, 2.4, 2.2};
  d.run.volumes = {volume("street", {12, 8, 12}, {1, 1, 1}, {0, 0, 0})};
  d.run.renderer.width = 96;
  d.run.renderer.height = 64;
  d.script.frames = 40;
  d.script.camera.position = {5.5, 3.2, 11};
  d.script.camera.target = {5.5, 0.5, 3};
  return d;
}

/// Two facing mirrors inside a diffuse box.
inline ConfigDocument mirrors() {
  ConfigDocument d;
  d.scene.materials = {material("wall", {0.5, 0.5, 0.5}), material("mirror", {0, 0, 0}, {}, {0.8, 0.8, 0.8})};
  d.scene.geometry = {room({-2, 0, -2}, {2, 3, 2}, "wall"),
                      quad({-1, 0.5, -1.5}, {2, 0, 0}, {0, 2, 0}, "mirror"),  // faces +z
                      quad({-1, 0.5, 1.5}, {0, 2, 0}, {2, 0, 0}, "mirror")};  // faces -z
  d.scene.lights = {point_light("lamp", {0, 2.8, 0}, {2, 2, 2})};
  d.run.volumes = {volume("mirrors", {5, 4, 5}, {1, 1, 1}, {-2, 0, -2})};
  d.run.renderer.width = 64;
  d.run.renderer.height = 48;
  d.script.frames = 60;
  d.script.camera.position = {0, 1.5, 1.2};
  d.script.camera.target = {0, 1.5, -1.5};
  d.script.camera.fov_y_degrees = 40;
  return d;
}

/// A dense camera-tracking volume nested inside a sparse static one over an open courtyard.
inline ConfigDocument cascade() {
  ConfigDocument d;
  d.scene.materials = {material("ground", {0.5, 0.5, 0.5}), material("stone", {0.6, 0.6, 0.6})};
  d.scene.environment = {0.3, 0.35, 0.45};
  d.scene.geometry = {quad({-16, 0, -16}, {0, 0, 32}, {32, 0, 0}, "ground"), box({-3, 0, -3}, {-1, 3, -1}, "stone"),
                      box({2, 0, 1}, {4, 2, 4}, "stone")};
  d.scene.lights = {point_light("lamp", {0, 4, 0}, {20, 20, 20})};
  VolumeSettings dense = volume("dense", {8, 6, 8}, {1, 1, 1}, {-3.5, 0.25, -3.5});
  dense.desc.camera_tracking = true;
  d.run.volumes = {dense, volume("sparse", {9, 4, 9}, {4, 4, 4}, {-16, -2, -16})};
  d.run.renderer.width = 96;
  d.run.renderer.height = 64;
  d.script.frames = 40;
  d.script.camera.position = {0, 1.5, 5};
  d.script.camera.target = {0, 1, 0};
  d.script.camera_keys = {{0, {0, 1.5, 5}, {0, 1, 0}}, {39, {6, 1.5, 5}, {6, 1, 0}}};
  return d;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"furnace", "reference_furnace", "cornell", "two_room",
                                          "villa_corner", "street", "mirrors", "cascade"};
  return n;
}

inline ConfigDocument by_name(const std::string& name) {
  if (name == "furnace") return furnace();
  if (name == "reference_furnace") return reference_furnace();
  if (name == "cornell") return cornell();
  if (name == "two_room") return two_room();
  if (name == "villa_corner") return villa_corner();
  if (name == "street") return street();
  if (name == "mirrors") return mirrors();
  if (name == "cascade") return cascade();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace ddgi::presets
