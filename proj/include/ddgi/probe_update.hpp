#pragma once

// Per-frame probe update: rotated spherical-Fibonacci ray sets, ray shading, texel
// accumulation, perceptual encoding and adaptive hysteresis blending.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ddgi/bvh.hpp"
#include "ddgi/math.hpp"
#include "ddgi/probe_query.hpp"
#include "ddgi/probe_volume.hpp"
#include "ddgi/shading.hpp"

namespace ddgi {

inline constexpr double kDefaultIrradianceHysteresis = 0.97;
inline constexpr double kDefaultVisibilityHysteresis = 0.98;
inline constexpr double kDefaultVisibilityExponent = 50.0;
inline constexpr int kDefaultRaysPerProbe = 256;
inline constexpr double kSignificantChangeThreshold = 0.25;
inline constexpr double kNewDistributionChangeThreshold = 0.8;
inline constexpr double kSignificantChangeHysteresisDrop = 0.15;
inline constexpr double kBackfaceDepthScale = 0.2;  // backface hits keep 20% of their depth

struct UpdateStats {
  std::int64_t rays_traced = 0;
  std::int64_t probes_updated = 0;
  std::int64_t texels_blended = 0;
  std::int64_t negative_clamps = 0;      // negative radiance clamped before encoding
  std::int64_t variance_clamps = 0;      // mean^2 > mean-of-squares after a blend
  std::int64_t significant_changes = 0;  // irradiance texels over the 0.25 threshold
  std::int64_t new_distributions = 0;    // irradiance texels over the 0.8 threshold
  std::int64_t invalid_samples = 0;      // probe queries that found no usable volume

  UpdateStats& operator+=(const UpdateStats& o) {
    rays_traced += o.rays_traced;
    probes_updated += o.probes_updated;
    texels_blended += o.texels_blended;
    negative_clamps += o.negative_clamps;
    variance_clamps += o.variance_clamps;
    significant_changes += o.significant_changes;
    new_distributions += o.new_distributions;
    invalid_samples += o.invalid_samples;
    return *this;
  }
};

struct RayResult {
  Rgb radiance;
  double distance = 0.0;
  bool frontface = false;
  bool hit = false;
};

struct UpdateRaySet {
  Int3 probe;
  std::vector<UnitVec3> directions;
  std::vector<RayResult> results;
};

/// Spherical Fibonacci directions under one shared rotation.
inline std::vector<UnitVec3> probe_ray_directions(const Rotation3& rotation, int n) {
  std::vector<UnitVec3> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) dirs.push_back(rotation * spherical_fibonacci(i, n));
  return dirs;
}

struct ShadeContext {
  const Scene* scene = nullptr;
  const VolumeBlendSet* volumes = nullptr;  // previous-frame data
  Vec3 camera;
  BlendParams blend;
};

/// Radiance and stored distance for one probe ray.
inline RayResult shade_update_ray(const std::optional<Hit>& hit, const Ray& ray, const ShadeContext& ctx,
                                  double distance_clamp, UpdateStats* stats = nullptr) {
  RayResult r;
  if (!hit) {
    r.radiance = ctx.scene->environment;
    r.distance = distance_clamp;
    return r;
  }
  r.hit = true;
  r.frontface = hit->frontface;
  if (!hit->frontface) {
    r.distance = std::min(kBackfaceDepthScale * hit->t, distance_clamp);
    return r;
  }
  r.distance = std::min(hit->t, distance_clamp);
  const Material& m = ctx.scene->material(hit->material);
  r.radiance = m.emissive + direct_lighting(*ctx.scene, hit->position, hit->normal, m.albedo);
  if (max_component(m.albedo) > 0.0 && ctx.volumes && !ctx.volumes->empty()) {
    const QueryPoint q{hit->position, UnitVec3::normalized(hit->normal), UnitVec3::normalized(-ray.direction)};
    const MultiSample s = sample_multi_volume(q, *ctx.volumes, ctx.camera, ctx.blend);
    if (s.valid) r.radiance += m.albedo * s.irradiance;
    else if (stats) ++stats->invalid_samples;
  }
  return r;
}

enum class TexelMode { kIrradiance, kVisibility };

namespace detail {
// x^e with exponentiation by squaring when e is a small non-negative integer.
inline double power_cosine(double x, double e) {
  if (e >= 0.0 && e <= 1024.0 && e == std::floor(e)) {
    auto n = static_cast<unsigned>(e);
    double result = 1.0, base = x;
    while (n) {
      if (n & 1u) result *= base;
      base *= base;
      n >>= 1u;
    }
    return result;
  }
  return std::pow(x, e);
}
}  // namespace detail

/// Cosine-weighted (irradiance) or power-cosine-weighted (visibility) average of the ray results
/// about `texel_dir`. Visibility returns (mean distance, mean squared distance, 0).
/// nullopt when every weight is zero.
inline std::optional<Vec3> accumulate_texel(const UpdateRaySet& rays, const Vec3& texel_dir, TexelMode mode,
                                            double visibility_exponent = kDefaultVisibilityExponent) {
  Vec3 sum;
  double wsum = 0.0;
  for (std::size_t i = 0; i < rays.directions.size(); ++i) {
    const double c = dot(texel_dir, rays.directions[i].vec());
    if (c <= 0.0) continue;
    const RayResult& res = rays.results[i];
    if (mode == TexelMode::kIrradiance) {
      sum += res.radiance * c;
      wsum += c;
    } else {
      const double w = detail::power_cosine(c, visibility_exponent);
      sum += Vec3(res.distance, res.distance * res.distance, 0.0) * w;
      wsum += w;
    }
  }
  if (!(wsum > 0.0)) return std::nullopt;
  return sum / wsum;
}

/// x^(1/gamma) per channel; negative inputs are clamped to zero and counted.
inline Rgb encode_perceptual(const Rgb& linear, double gamma = kIrradianceGamma, std::int64_t* clamps = nullptr) {
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    double v = linear[c];
    if (v < 0.0) {
      v = 0.0;
      if (clamps) ++*clamps;
    }
    out[c] = std::pow(v, 1.0 / gamma);
  }
  return out;
}

/// Inverse of encode_perceptual for a single texel: (enc^(gamma/2))^2.
inline Rgb decode_perceptual(const Rgb& encoded, double gamma = kIrradianceGamma) {
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    const double h = std::pow(std::max(0.0, encoded[c]), gamma * 0.5);
    out[c] = h * h;
  }
  return out;
}

inline double blend_texel(double old_value, double new_value, double alpha) {
  return alpha * old_value + (1.0 - alpha) * new_value;
}
inline Vec3 blend_texel(const Vec3& old_value, const Vec3& new_value, double alpha) {
  return old_value * alpha + new_value * (1.0 - alpha);
}

/// Per-texel hysteresis reduction for irradiance updates.
inline double adapt_hysteresis_texel(double change, double alpha) {
  const double magnitude = std::abs(change);
  if (magnitude > kSignificantChangeThreshold) alpha = std::max(0.0, alpha - kSignificantChangeHysteresisDrop);
  if (magnitude > kNewDistributionChangeThreshold) alpha = 0.0;
  return alpha;
}

enum class SceneEvent { kSmallLight, kLargeLight, kLargeObject };

inline const char* to_string(SceneEvent e) {
  switch (e) {
    case SceneEvent::kSmallLight: return "small_light";
    case SceneEvent::kLargeLight: return "large_light";
    case SceneEvent::kLargeObject: return "large_object";
  }
  return "?";
}

/// Base hysteresis plus the schedule of event-driven reductions that apply to all probes.
class HysteresisState {
 public:
  struct Override {
    double scale = 1.0;
    int frames_remaining = 0;
    bool visibility = false;
  };

  explicit HysteresisState(double irradiance = kDefaultIrradianceHysteresis,
                           double visibility = kDefaultVisibilityHysteresis)
      : base_irradiance_(irradiance), base_visibility_(visibility) {
    if (!(irradiance >= 0.0 && irradiance < 1.0 && visibility >= 0.0 && visibility < 1.0))
      throw std::invalid_argument("HysteresisState: alpha must be in [0, 1)");
  }

  double base_irradiance() const { return base_irradiance_; }
  double base_visibility() const { return base_visibility_; }
  const std::vector<Override>& schedule() const { return schedule_; }

  /// Effective alpha for the current frame; overlapping overrides take the minimum.
  double irradiance_alpha() const { return base_irradiance_ * min_scale(false); }
  double visibility_alpha() const { return base_visibility_ * min_scale(true); }

  void add(double scale, int frames, bool visibility) { schedule_.push_back({scale, frames, visibility}); }

  /// Call once after each frame's update.
  void end_frame() {
    for (auto& o : schedule_) --o.frames_remaining;
    std::erase_if(schedule_, [](const Override& o) { return o.frames_remaining <= 0; });
  }

 private:
  double min_scale(bool visibility) const {
    double s = 1.0;
    for (const auto& o : schedule_)
      if (o.visibility == visibility) s = std::min(s, o.scale);
    return s;
  }

  double base_irradiance_;
  double base_visibility_;
  std::vector<Override> schedule_;
};

/// Scene-wide hysteresis reductions, effective from the frame the event is raised.
inline void apply_event_heuristic(SceneEvent event, HysteresisState& state) {
  switch (event) {
    case SceneEvent::kSmallLight:
      state.add(0.85, 4, false);
      break;
    case SceneEvent::kLargeLight:
      state.add(0.5, 10, false);
      break;
    case SceneEvent::kLargeObject:
      state.add(0.5, 10, false);
      state.add(0.5, 7, true);
      break;
  }
}

struct UpdateParams {
  int rays_per_probe = kDefaultRaysPerProbe;
  double visibility_exponent = kDefaultVisibilityExponent;
  double gamma = kIrradianceGamma;
  bool texel_heuristics = true;
};

/// Traces and shades one probe's rays.
inline UpdateRaySet trace_probe_rays(const ProbeVolume& volume, const Int3& logical, const Rotation3& rotation,
                                     int ray_count, const ShadeContext& ctx, UpdateStats& stats) {
  UpdateRaySet set;
  set.probe = logical;
  set.directions = probe_ray_directions(rotation, ray_count);
  set.results.resize(set.directions.size());
  const Vec3 origin = volume.probe_world_position(logical);
  const double clamp = volume.distance_clamp();
  for (std::size_t i = 0; i < set.directions.size(); ++i) {
    const Ray ray{origin, set.directions[i].vec()};
    set.results[i] = shade_update_ray(ctx.scene->ray_cast(ray), ray, ctx, clamp, &stats);
  }
  stats.rays_traced += ray_count;
  return set;
}

/// Blends a traced ray set into the probe's tiles, then rewrites its borders.
/// `alpha_irradiance` already includes any event scaling; per-texel thresholds apply on top.
inline void blend_probe(ProbeVolume& volume, const UpdateRaySet& rays, double alpha_irradiance,
                        double alpha_visibility, const UpdateParams& params, UpdateStats& stats) {
  const int tile = volume.storage_linear(rays.probe);
  ProbeRecord& rec = volume.record(rays.probe);
  if (rec.zero_hysteresis_frames > 0) {
    alpha_irradiance = 0.0;
    alpha_visibility = 0.0;
    --rec.zero_hysteresis_frames;
  }

  IrradianceAtlas& irr = volume.irradiance();
  const int ires = irr.resolution();
  for (int ty = 0; ty < ires; ++ty) {
    for (int tx = 0; tx < ires; ++tx) {
      const auto estimate = accumulate_texel(rays, texel_direction(tx, ty, ires), TexelMode::kIrradiance);
      if (!estimate) continue;
      const Rgb enc = encode_perceptual(*estimate, params.gamma, &stats.negative_clamps);
      auto& texel = irr.at(tile, tx, ty);
      const Vec3 old{texel[0], texel[1], texel[2]};
      double alpha = alpha_irradiance;
      if (params.texel_heuristics) {
        const double change = max_component(vabs(enc - old));
        if (change > kSignificantChangeThreshold) ++stats.significant_changes;
        if (change > kNewDistributionChangeThreshold) ++stats.new_distributions;
        alpha = adapt_hysteresis_texel(change, alpha);
      }
      const Vec3 blended = blend_texel(old, enc, alpha);
      for (int c = 0; c < 3; ++c) texel[c] = static_cast<float>(blended[c]);
      ++stats.texels_blended;
    }
  }
  irr.write_borders(tile);

  VisibilityAtlas& vis = volume.visibility();
  const int vres = vis.resolution();
  for (int ty = 0; ty < vres; ++ty) {
    for (int tx = 0; tx < vres; ++tx) {
      const auto estimate =
          accumulate_texel(rays, texel_direction(tx, ty, vres), TexelMode::kVisibility, params.visibility_exponent);
      if (!estimate) continue;
      auto& texel = vis.at(tile, tx, ty);
      double mean = blend_texel(texel[0], estimate->x, alpha_visibility);
      double mean_sq = blend_texel(texel[1], estimate->y, alpha_visibility);
      if (mean_sq < mean * mean) {
        if (mean * mean - mean_sq > 1e-4) ++stats.variance_clamps;
        mean_sq = mean * mean;
      }
      texel[0] = static_cast<float>(mean);
      texel[1] = static_cast<float>(mean_sq);
      ++stats.texels_blended;
    }
  }
  vis.write_borders(tile);
  ++stats.probes_updated;
}

}  // namespace ddgi
