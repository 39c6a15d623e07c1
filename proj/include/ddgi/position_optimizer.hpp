#pragma once

// Iterative probe relocation around static geometry. Each iteration traces a
// distance-only ray census from the probe and either pushes the probe through
// the closest backface (when it appears to be inside geometry) or nudges it
// toward its farthest frontface when a surface crowds it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ddgi/bvh.hpp"
#include "ddgi/math.hpp"
#include "ddgi/parallel.hpp"
#include "ddgi/probe_volume.hpp"

namespace ddgi {

inline constexpr int kOptimizerIterations = 5;
inline constexpr double kStuckBackfaceFraction = 0.25;
inline constexpr double kFrontfaceStep = 0.2;        // m
inline constexpr double kOffsetEpsilon = 1e-3;
inline constexpr std::uint64_t kOptimizerSeed = 0x0b5e55edull;

struct DirectedDistance {
  Vec3 direction;  // unit
  double distance = std::numeric_limits<double>::infinity();
  bool valid() const { return std::isfinite(distance); }
  Vec3 vector() const { return direction * distance; }
};

struct ProbeRayStats {
  int backface_count = 0;
  int rays_per_probe = 0;
  DirectedDistance closest_backface;
  DirectedDistance closest_frontface;
  DirectedDistance farthest_frontface;

  double backface_fraction() const {
    return rays_per_probe > 0 ? static_cast<double>(backface_count) / rays_per_probe : 0.0;
  }
};

/// Distance-only census against static geometry.
inline ProbeRayStats gather_ray_stats(const Scene& scene, const Vec3& position, const Rotation3& rotation, int rays) {
  ProbeRayStats st;
  st.rays_per_probe = rays;
  st.farthest_frontface.distance = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < rays; ++i) {
    const Vec3 dir = (rotation * spherical_fibonacci(i, rays)).vec();
    const auto hit = scene.ray_cast_static({position, dir});
    if (!hit) continue;
    if (!hit->frontface) {
      ++st.backface_count;
      if (hit->t < st.closest_backface.distance) st.closest_backface = {dir, hit->t};
    } else {
      if (hit->t < st.closest_frontface.distance) st.closest_frontface = {dir, hit->t};
      if (hit->t > st.farthest_frontface.distance) st.farthest_frontface = {dir, hit->t};
    }
  }
  if (!std::isfinite(st.farthest_frontface.distance)) st.farthest_frontface = {};
  return st;
}

/// One relocation step. `offset_limit` is the fraction of `spacing` a probe may move per axis.
inline Vec3 optimize_probe_iteration(const ProbeRayStats& stats, const Vec3& current_offset, const Vec3& spacing,
                                     double offset_limit) {
  const Vec3 limit = spacing * offset_limit;
  if (stats.backface_fraction() > kStuckBackfaceFraction && stats.closest_backface.valid()) {
    // Largest scale of the closest-backface vector that keeps every axis inside the limit.
    const Vec3 b = stats.closest_backface.vector();
    double scale = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      if (b[a] == 0.0) continue;
      const double pos = (limit[a] - current_offset[a]) / b[a];
      const double neg = (-limit[a] - current_offset[a]) / b[a];
      scale = std::min(scale, std::max(pos, neg));
    }
    scale -= kOffsetEpsilon;
    // Can't get through the backface: stay.
    if (!(scale > 1.0)) return current_offset;
    return current_offset + b * scale;
  }

  const double crowding = min_component(spacing);
  if (stats.closest_frontface.valid() && stats.farthest_frontface.valid() &&
      stats.closest_frontface.distance < crowding &&
      dot(stats.farthest_frontface.direction, stats.closest_frontface.direction) <= 0.5) {
    const Vec3 step = stats.farthest_frontface.direction * std::min(kFrontfaceStep, stats.farthest_frontface.distance);
    return vmin(vmax(current_offset + step, -limit), limit);
  }
  return current_offset;
}

struct OptimizerOptions {
  int rays_per_probe = 256;
  int iterations = kOptimizerIterations;
  bool enabled = true;
  bool static_aabb_fast_path = false;
  int threads = 0;
};

struct ProbeOptimizationResult {
  Vec3 offset;
  bool stuck = false;
  int iterations = 0;
  ProbeRayStats final_stats;  // census at the final position, used for classification
};

inline Rotation3 optimizer_rotation(int iteration) {
  return random_rotation(hash_combine(kOptimizerSeed, static_cast<std::uint64_t>(iteration)));
}

/// Optimizes one probe starting from `start_offset`.
inline ProbeOptimizationResult optimize_probe(const Scene& scene, const Vec3& grid_position, const Vec3& start_offset,
                                              const Vec3& spacing, double offset_limit,
                                              const std::vector<Aabb>& static_groups, const OptimizerOptions& opt) {
  ProbeOptimizationResult res;
  res.offset = start_offset;
  bool skip = !opt.enabled;
  if (!skip && opt.static_aabb_fast_path) {
    // No static geometry within a cell diagonal: neither branch can move the probe.
    double nearest = std::numeric_limits<double>::infinity();
    for (const Aabb& b : static_groups) nearest = std::min(nearest, b.distance(grid_position + start_offset));
    skip = nearest > length(spacing);
  }
  if (!skip) {
    for (int it = 0; it < opt.iterations; ++it) {
      const auto stats = gather_ray_stats(scene, grid_position + res.offset, optimizer_rotation(it), opt.rays_per_probe);
      res.offset = optimize_probe_iteration(stats, res.offset, spacing, offset_limit);
      ++res.iterations;
    }
  }
  res.final_stats =
      gather_ray_stats(scene, grid_position + res.offset, optimizer_rotation(opt.iterations), opt.rays_per_probe);
  res.stuck = res.final_stats.backface_fraction() > kStuckBackfaceFraction;
  return res;
}

/// Optimizes the listed probes of `volume` in place (offsets and stuck flags).
inline std::vector<ProbeOptimizationResult> run_position_optimization(ProbeVolume& volume, const Scene& scene,
                                                                     const std::vector<Int3>& probes,
                                                                     const std::vector<Aabb>& static_groups,
                                                                     const OptimizerOptions& opt) {
  std::vector<ProbeOptimizationResult> results(probes.size());
  parallel_for(static_cast<int>(probes.size()), opt.threads, [&](int begin, int end, int) {
    for (int i = begin; i < end; ++i) {
      const Int3& p = probes[static_cast<std::size_t>(i)];
      results[static_cast<std::size_t>(i)] = optimize_probe(scene, volume.probe_grid_position(p), volume.record(p).offset,
                                                            volume.spacing(), volume.desc().offset_limit,
                                                            static_groups, opt);
    }
  });
  for (std::size_t i = 0; i < probes.size(); ++i) {
    volume.set_offset(probes[i], results[i].offset);
    volume.record(probes[i]).stuck = results[i].stuck;
  }
  return results;
}

}  // namespace ddgi
