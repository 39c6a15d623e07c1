#pragma once

// Procedural primitives used by configs and built-in scenes.

#include <array>
#include <vector>

#include "ddgi/scene.hpp"

namespace ddgi {

/// Two triangles; the front side faces along cross(edge1, edge2).
inline std::vector<Triangle> make_quad(const Vec3& corner, const Vec3& edge1, const Vec3& edge2, int material) {
  Triangle a{corner, corner + edge1, corner + edge1 + edge2, material};
  Triangle b{corner, corner + edge1 + edge2, corner + edge2, material};
  return {a, b};
}

enum class BoxFace { kMinX, kMaxX, kMinY, kMaxY, kMinZ, kMaxZ };

/// Six faces of [lo, hi]. Outward-facing for solid boxes, inward-facing for rooms.
inline std::vector<Triangle> make_box_faces(const Aabb& b, const std::array<int, 6>& materials, bool inward) {
  const Vec3 lo = b.lo, hi = b.hi, e = hi - lo;
  const Vec3 ex{e.x, 0, 0}, ey{0, e.y, 0}, ez{0, 0, e.z};
  // Outward winding per face: cross(edge1, edge2) points away from the box.
  struct Face {
    Vec3 corner, e1, e2;
  };
  const std::array<Face, 6> faces{{
      {lo, ez, ey},                   // -x
      {Vec3{hi.x, lo.y, lo.z}, ey, ez},  // +x
      {lo, ex, ez},                   // -y
      {Vec3{lo.x, hi.y, lo.z}, ez, ex},  // +y
      {lo, ey, ex},                   // -z
      {Vec3{lo.x, lo.y, hi.z}, ex, ey},  // +z
  }};
  std::vector<Triangle> out;
  for (std::size_t f = 0; f < 6; ++f) {
    const Face& fc = faces[f];
    auto q = inward ? make_quad(fc.corner, fc.e2, fc.e1, materials[f]) : make_quad(fc.corner, fc.e1, fc.e2, materials[f]);
    out.insert(out.end(), q.begin(), q.end());
  }
  return out;
}

inline std::vector<Triangle> make_box(const Aabb& b, int material) {
  return make_box_faces(b, {material, material, material, material, material, material}, false);
}

inline std::vector<Triangle> make_room(const Aabb& b, int material) {
  return make_box_faces(b, {material, material, material, material, material, material}, true);
}

}  // namespace ddgi
