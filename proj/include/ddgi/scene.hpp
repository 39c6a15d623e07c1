#pragma once

// Triangle scene with materials, analytic lights and rigidly moving objects.

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddgi/math.hpp"

namespace ddgi {

struct Material {
  std::string name;
  Rgb albedo{0.5, 0.5, 0.5};
  Rgb emissive{0, 0, 0};
  Rgb glossy_reflectance{0, 0, 0};
  double roughness = 0.0;

  /// Albedo plus glossy reflectance must not exceed one per channel.
  bool energy_conserving() const {
    for (int c = 0; c < 3; ++c)
      if (albedo[c] + glossy_reflectance[c] > 1.0 + 1e-9) return false;
    return true;
  }
  bool is_glossy() const { return max_component(glossy_reflectance) > 0.0; }
  friend bool operator==(const Material&, const Material&) = default;
};

struct Light {
  enum class Kind { kPoint, kDirectional };
  std::string name;
  Kind kind = Kind::kPoint;
  Rgb intensity{1, 1, 1};  // W/sr for point lights, W/m^2 at normal incidence for directional
  Vec3 position{0, 0, 0};
  Vec3 direction{0, -1, 0};  // direction light travels
  bool enabled = true;
  friend bool operator==(const Light&, const Light&) = default;
};

struct Aabb {
  Vec3 lo = Vec3::splat(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::splat(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) { lo = vmin(lo, p); hi = vmax(hi, p); }
  void extend(const Aabb& b) { lo = vmin(lo, b.lo); hi = vmax(hi, b.hi); }
  bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extent() const { return hi - lo; }
  /// Euclidean distance from p to the box (0 inside).
  double distance(const Vec3& p) const {
    const Vec3 d = vmax(vmax(lo - p, p - hi), Vec3{});
    return length(d);
  }
};

/// Rigid transform: p' = rotation * p + translation.
struct Transform {
  Rotation3 rotation;
  Vec3 translation;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }
};

struct Triangle {
  Vec3 v0, v1, v2;
  int material = 0;
  int object = -1;  // -1 for static geometry, else dynamic object index

  Vec3 geometric_normal() const { return cross(v1 - v0, v2 - v0); }
  bool degenerate() const { return length(geometric_normal()) <= 1e-14; }
  Aabb bounds() const {
    Aabb b;
    b.extend(v0);
    b.extend(v1);
    b.extend(v2);
    return b;
  }
};

struct Mesh {
  std::string name;
  std::vector<Triangle> triangles;  // local space
};

struct DynamicObject {
  std::string name;
  Mesh mesh;
  Transform transform;

  std::vector<Triangle> world_triangles(int object_index) const {
    std::vector<Triangle> out;
    out.reserve(mesh.triangles.size());
    for (Triangle t : mesh.triangles) {
      t.v0 = transform.apply(t.v0);
      t.v1 = transform.apply(t.v1);
      t.v2 = transform.apply(t.v2);
      t.object = object_index;
      out.push_back(t);
    }
    return out;
  }
  Aabb world_aabb() const {
    Aabb b;
    for (const Triangle& t : mesh.triangles) {
      b.extend(transform.apply(t.v0));
      b.extend(transform.apply(t.v1));
      b.extend(transform.apply(t.v2));
    }
    return b;
  }
};

/// World AABB of a dynamic object grown by one probe cell plus the self-shadow bias length.
inline Aabb extended_aabb(const DynamicObject& obj, const Vec3& probe_spacing, double bias_len) {
  if (probe_spacing.x < 0 || probe_spacing.y < 0 || probe_spacing.z < 0)
    throw std::invalid_argument("extended_aabb: negative spacing");
  Aabb b = obj.world_aabb();
  const Vec3 grow = probe_spacing + Vec3::splat(bias_len);
  b.lo -= grow;
  b.hi += grow;
  return b;
}

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Hit {
  double t = 0;
  Vec3 position;
  Vec3 normal;  // unit geometric normal as wound, not flipped toward the ray
  bool frontface = true;
  int material = 0;
  int triangle = -1;
  int object = -1;
};

inline constexpr double kRayEpsilon = 1e-4;

}  // namespace ddgi
