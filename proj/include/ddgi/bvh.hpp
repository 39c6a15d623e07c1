#pragma once

// Binned-SAH bounding volume hierarchy over triangles, plus the scene container
// that owns static and dynamic geometry.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ddgi/scene.hpp"

namespace ddgi {

/// Nearest intersection of `ray` with `tri` in (t_min, t_max], or nullopt.
/// Barycentric tests carry a tiny tolerance so shared edges never leak rays.
inline std::optional<double> intersect_triangle(const Ray& ray, const Triangle& tri, double t_min, double t_max) {
  constexpr double kBaryTolerance = 1e-12;
  const Vec3 e1 = tri.v1 - tri.v0, e2 = tri.v2 - tri.v0;
  const Vec3 p = cross(ray.direction, e2);
  const double det = dot(e1, p);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - tri.v0;
  const double u = dot(s, p) * inv;
  if (u < -kBaryTolerance || u > 1.0 + kBaryTolerance) return std::nullopt;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.direction, q) * inv;
  if (v < -kBaryTolerance || u + v > 1.0 + kBaryTolerance) return std::nullopt;
  const double t = dot(e2, q) * inv;
  if (t <= t_min || t > t_max) return std::nullopt;
  return t;
}

inline Hit make_hit(const Ray& ray, const Triangle& tri, int index, double t) {
  Hit h;
  h.t = t;
  h.position = ray.origin + ray.direction * t;
  h.normal = normalize(tri.geometric_normal());
  h.frontface = dot(h.normal, ray.direction) < 0.0;
  h.material = tri.material;
  h.triangle = index;
  h.object = tri.object;
  return h;
}

class Bvh {
 public:
  Bvh() = default;

  /// Builds over the non-degenerate triangles; throws if none remain.
  explicit Bvh(std::vector<Triangle> triangles) {
    triangles_.reserve(triangles.size());
    for (const Triangle& t : triangles)
      if (!t.degenerate()) triangles_.push_back(t);
    if (triangles_.empty()) throw std::invalid_argument("Bvh: scene has no non-degenerate triangles");
    std::vector<BuildItem> items(triangles_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
      items[i].bounds = triangles_[i].bounds();
      items[i].centroid = items[i].bounds.center();
      items[i].index = static_cast<int>(i);
    }
    nodes_.reserve(2 * items.size());
    nodes_.push_back({});
    build(items, 0, static_cast<int>(items.size()), 0);
    std::vector<Triangle> ordered(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) ordered[i] = triangles_[items[i].index];
    triangles_ = std::move(ordered);
  }

  bool empty() const { return triangles_.empty(); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.count > 0; }));
  }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  /// Nearest hit with t in (kRayEpsilon, t_max]. Two-sided: backfaces are reported, never culled.
  std::optional<Hit> ray_cast(const Ray& ray, double t_max) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
    double best = t_max;
    int best_index = -1;
    std::array<int, 128> stack;
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!slab_test(node.bounds, ray.origin, inv, best)) continue;
      if (node.count > 0) {
        for (int i = node.first; i < node.first + node.count; ++i) {
          if (auto t = intersect_triangle(ray, triangles_[i], kRayEpsilon, best)) {
            best = *t;
            best_index = i;
          }
        }
      } else {
        // Visit the nearer child first.
        const int near_first = ray.direction[node.axis] < 0 ? node.first + 1 : node.first;
        const int other = near_first == node.first ? node.first + 1 : node.first;
        stack[sp++] = other;
        stack[sp++] = near_first;
      }
    }
    if (best_index < 0) return std::nullopt;
    return make_hit(ray, triangles_[best_index], best_index, best);
  }

  /// True if anything is hit in (kRayEpsilon, t_max).
  bool occluded(const Ray& ray, double t_max) const {
    if (nodes_.empty()) return false;
    const Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
    std::array<int, 128> stack;
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!slab_test(node.bounds, ray.origin, inv, t_max)) continue;
      if (node.count > 0) {
        for (int i = node.first; i < node.first + node.count; ++i)
          if (intersect_triangle(ray, triangles_[i], kRayEpsilon, t_max)) return true;
      } else {
        stack[sp++] = node.first;
        stack[sp++] = node.first + 1;
      }
    }
    return false;
  }

 private:
  struct Node {
    Aabb bounds;
    int first = 0;  // leaf: first triangle; interior: left child (right = first + 1)
    int count = 0;  // >0 marks a leaf
    int axis = 0;
  };
  struct BuildItem {
    Aabb bounds;
    Vec3 centroid;
    int index = 0;
  };

  static constexpr int kLeafSize = 4;
  static constexpr int kBins = 12;

  static double area(const Aabb& b) {
    if (b.empty()) return 0.0;
    const Vec3 e = b.extent();
    return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
  }

  static bool slab_test(const Aabb& b, const Vec3& o, const Vec3& inv, double t_max) {
    double t0 = 0.0, t1 = t_max;
    for (int a = 0; a < 3; ++a) {
      double ta = (b.lo[a] - o[a]) * inv[a];
      double tb = (b.hi[a] - o[a]) * inv[a];
      if (ta > tb) std::swap(ta, tb);
      // NaN from 0 * inf falls through to the conservative side.
      t0 = ta > t0 ? ta : t0;
      t1 = tb < t1 ? tb : t1;
      if (t0 > t1 * (1.0 + 1e-12) + 1e-12) return false;
    }
    return true;
  }

  void build(std::vector<BuildItem>& items, int begin, int end, int node_index) {
    Aabb bounds, centroid_bounds;
    for (int i = begin; i < end; ++i) {
      bounds.extend(items[i].bounds);
      centroid_bounds.extend(items[i].centroid);
    }
    nodes_[node_index].bounds = bounds;
    const int count = end - begin;
    if (count <= kLeafSize) {
      nodes_[node_index].first = begin;
      nodes_[node_index].count = count;
      return;
    }

    // Binned SAH over the widest centroid axis.
    const Vec3 ext = centroid_bounds.extent();
    int axis = 0;
    if (ext.y > ext[axis]) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    int mid = begin + count / 2;
    if (ext[axis] > 0.0) {
      std::array<Aabb, kBins> bin_bounds;
      std::array<int, kBins> bin_counts{};
      auto bin_of = [&](const BuildItem& it) {
        int b = static_cast<int>(kBins * (it.centroid[axis] - centroid_bounds.lo[axis]) / ext[axis]);
        return std::clamp(b, 0, kBins - 1);
      };
      for (int i = begin; i < end; ++i) {
        const int b = bin_of(items[i]);
        bin_bounds[b].extend(items[i].bounds);
        ++bin_counts[b];
      }
      double best_cost = std::numeric_limits<double>::infinity();
      int best_split = -1;
      for (int split = 1; split < kBins; ++split) {
        Aabb left, right;
        int nl = 0, nr = 0;
        for (int b = 0; b < split; ++b) { left.extend(bin_bounds[b]); nl += bin_counts[b]; }
        for (int b = split; b < kBins; ++b) { right.extend(bin_bounds[b]); nr += bin_counts[b]; }
        if (nl == 0 || nr == 0) continue;
        const double cost = area(left) * nl + area(right) * nr;
        if (cost < best_cost) { best_cost = cost; best_split = split; }
      }
      if (best_split > 0) {
        auto it = std::partition(items.begin() + begin, items.begin() + end,
                                 [&](const BuildItem& item) { return bin_of(item) < best_split; });
        mid = static_cast<int>(it - items.begin());
      }
    }
    if (mid == begin || mid == end) {
      mid = begin + count / 2;
      std::nth_element(items.begin() + begin, items.begin() + mid, items.begin() + end,
                       [axis](const BuildItem& a, const BuildItem& b) { return a.centroid[axis] < b.centroid[axis]; });
    }
    // Children live in adjacent slots.
    const int left_index = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[node_index].first = left_index;
    nodes_[node_index].axis = axis;
    build(items, begin, mid, left_index);
    build(items, mid, end, left_index + 1);
  }

  std::vector<Triangle> triangles_;
  std::vector<Node> nodes_;
};

/// Scene container: materials, lights, static triangles and dynamic objects.
/// `commit()` must be called after geometry or transforms change.
class Scene {
 public:
  std::vector<Material> materials;
  std::vector<Light> lights;
  std::vector<Triangle> static_triangles;
  std::vector<DynamicObject> objects;
  std::vector<Aabb> static_groups;  // bounds of each static primitive, for the AABB fast path
  Rgb environment{0, 0, 0};

  void commit() {
    std::vector<Triangle> all = static_triangles;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      auto w = objects[i].world_triangles(static_cast<int>(i));
      all.insert(all.end(), w.begin(), w.end());
    }
    full_ = all.empty() ? Bvh() : Bvh(std::move(all));
    static_bvh_ = static_triangles.empty() ? Bvh() : Bvh(static_triangles);
    static_aabb_ = Aabb{};
    for (const Triangle& t : static_triangles) {
      if (t.degenerate()) continue;
      static_aabb_.extend(t.bounds());
    }
  }

  std::optional<Hit> ray_cast(const Ray& ray, double t_max = kInfinity) const { return full_.ray_cast(ray, t_max); }
  std::optional<Hit> ray_cast_static(const Ray& ray, double t_max = kInfinity) const {
    return static_bvh_.ray_cast(ray, t_max);
  }
  bool occluded(const Ray& ray, double t_max) const { return full_.occluded(ray, t_max); }

  const Material& material(int index) const { return materials.at(static_cast<std::size_t>(index)); }
  int find_light(const std::string& name) const {
    for (std::size_t i = 0; i < lights.size(); ++i)
      if (lights[i].name == name) return static_cast<int>(i);
    return -1;
  }
  int find_object(const std::string& name) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (objects[i].name == name) return static_cast<int>(i);
    return -1;
  }
  const Aabb& static_aabb() const { return static_aabb_; }
  const Bvh& bvh() const { return full_; }

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

 private:
  Bvh full_;
  Bvh static_bvh_;
  Aabb static_aabb_;
};

}  // namespace ddgi
