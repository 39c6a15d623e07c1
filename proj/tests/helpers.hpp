#pragma once

// Fixtures shared by the unit and acceptance tests.

#include "ddgi/ddgi.hpp"

namespace testing_helpers {

using namespace ddgi;

/// Every probe live, initialized and storing constant radiance `l`, fully visible.
inline void fill_constant(ProbeVolume& v, const Rgb& l, ProbeState state = ProbeState::kVigilant) {
  const Rgb enc = encode_perceptual(l);
  const float far = static_cast<float>(v.distance_clamp());
  for (int i = 0; i < v.probe_count(); ++i) {
    const Int3 p = v.logical_from_linear(i);
    const int tile = v.storage_linear(p);
    v.irradiance().fill_tile(tile, {static_cast<float>(enc.x), static_cast<float>(enc.y), static_cast<float>(enc.z)});
    v.visibility().fill_tile(tile, {far, far * far});
    ProbeRecord& r = v.record(p);
    r.initialized = true;
    r.state = state;
  }
}

inline Material make_material(const Rgb& albedo, const Rgb& emissive = {}, const Rgb& glossy = {},
                              double roughness = 0.0) {
  Material m;
  m.albedo = albedo;
  m.emissive = emissive;
  m.glossy_reflectance = glossy;
  m.roughness = roughness;
  return m;
}

/// Closed room [lo, hi] of one material.
inline Scene room_scene(const Aabb& box, const Material& m) {
  Scene s;
  s.materials = {m};
  s.static_triangles = make_room(box, 0);
  s.static_groups = {box};
  s.commit();
  return s;
}

inline VolumeDesc grid(const Int3& counts, const Vec3& spacing, const Vec3& origin, bool tracking = false) {
  VolumeDesc d;
  d.counts = counts;
  d.spacing = spacing;
  d.origin = origin;
  d.camera_tracking = tracking;
  return d;
}

}  // namespace testing_helpers
