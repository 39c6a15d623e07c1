#pragma once

// Irradiance queries against probe volumes: 8-probe cage weighting with the
// self-shadow bias and Chebyshev visibility, perceptual decode, and blending
// across nested volumes.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ddgi/math.hpp"
#include "ddgi/probe_volume.hpp"

namespace ddgi {

inline constexpr double kDefaultSelfShadowBias = 0.3;
inline constexpr double kIrradianceGamma = 5.0;
inline constexpr double kChebyshevMinVariance = 1e-6;  // m^2
inline constexpr double kChebyshevMinWeight = 0.05;
inline constexpr double kMinCageWeight = 1e-6;

struct QueryPoint {
  Vec3 position;
  UnitVec3 normal;
  UnitVec3 view;  // toward the camera (or the ray origin for secondary hits)
};

struct QueryParams {
  double self_shadow_bias = kDefaultSelfShadowBias;  // B
  double gamma = kIrradianceGamma;
};

/// World-space bias added to a sample point before visibility tests.
/// `min_spacing` is the smallest axial probe spacing of the sampled volume.
inline Vec3 self_shadow_bias(const Vec3& normal, const Vec3& view, double min_spacing, double bias_scale) {
  return (normal * 0.2 + view * 0.8) * (0.75 * min_spacing) * bias_scale;
}

/// Chebyshev upper bound on the probability that a point at distance r is visible, given
/// the stored mean and mean-squared distance. Cubed for contrast and floored.
inline double chebyshev_weight(double mean, double mean_sq, double r) {
  if (r <= mean) return 1.0;
  const double variance = std::max(mean_sq - mean * mean, kChebyshevMinVariance);
  const double d = r - mean;
  const double base = variance / (variance + d * d);
  return std::clamp(base * base * base, kChebyshevMinWeight, 1.0);
}

/// Smooth wrap-shading term: small for probes behind the surface.
inline double backface_weight(const Vec3& dir_to_probe, const Vec3& normal) {
  const double w = (1.0 + dot(dir_to_probe, normal)) * 0.5;
  return w * w + 0.2;
}

/// Probes in these states contribute nothing to queries.
inline bool probe_contributes(const ProbeRecord& rec) {
  return rec.initialized && rec.state != ProbeState::kOff && rec.state != ProbeState::kSleeping;
}

struct CageCell {
  Int3 base;      // logical index of the lower corner probe
  Vec3 alpha;     // trilinear fractions in [0, 1]
};

/// Cage of the 8 probes around `position`, from grid corners (offsets ignored).
inline CageCell cage_cell(const ProbeVolume& v, const Vec3& position) {
  CageCell c;
  const Vec3 g = (position - v.origin()) / v.spacing();
  for (int a = 0; a < 3; ++a) {
    const int hi = v.counts()[a] - 2;
    c.base[a] = std::clamp(static_cast<int>(std::floor(g[a])), 0, hi);
    c.alpha[a] = std::clamp(g[a] - c.base[a], 0.0, 1.0);
  }
  return c;
}

struct VolumeSample {
  Rgb irradiance;           // linear, cosine-weighted average radiance
  double weight_sum = 0.0;  // unnormalized cage weight
  bool valid = false;
};

/// Decoded probe irradiance at one point from a single volume.
inline VolumeSample sample_volume_irradiance(const QueryPoint& q, const ProbeVolume& v, const QueryParams& params = {}) {
  const CageCell cell = cage_cell(v, q.position);
  const Vec3 biased = q.position + self_shadow_bias(q.normal, q.view, v.min_spacing(), params.self_shadow_bias);
  const OctUV normal_uv = octa_encode(q.normal);
  const double decode_power = params.gamma * 0.5;

  Vec3 sum;
  double weight_sum = 0.0;
  for (int i = 0; i < 8; ++i) {
    const Int3 offset{i & 1, (i >> 1) & 1, (i >> 2) & 1};
    const Int3 idx{cell.base.x + offset.x, cell.base.y + offset.y, cell.base.z + offset.z};
    const ProbeRecord& rec = v.record(idx);
    if (!probe_contributes(rec)) continue;
    const int tile = v.storage_linear(idx);
    const Vec3 probe_pos = v.probe_grid_position(idx) + rec.offset;

    double trilinear = 1.0;
    for (int a = 0; a < 3; ++a) trilinear *= offset[a] ? cell.alpha[a] : 1.0 - cell.alpha[a];

    const Vec3 to_probe = probe_pos - q.position;
    const double to_probe_len = length(to_probe);
    const Vec3 dir_to_probe = to_probe_len > 0.0 ? to_probe / to_probe_len : q.normal.vec();
    double weight = backface_weight(dir_to_probe, q.normal);

    // Visibility is fetched along the direction from the probe to the biased point.
    const Vec3 probe_to_point = biased - probe_pos;
    const double r = length(probe_to_point);
    if (r > 0.0) {
      const auto vis = v.visibility().sample_bilinear(tile, octa_encode(UnitVec3::normalized(probe_to_point)));
      weight *= chebyshev_weight(vis[0], vis[1], r);
    }
    weight *= trilinear;
    if (weight <= 0.0) continue;

    const auto enc = v.irradiance().sample_bilinear(tile, normal_uv);
    for (int c = 0; c < 3; ++c) sum[c] += weight * std::pow(std::max(0.0f, enc[c]), decode_power);
    weight_sum += weight;
  }

  VolumeSample out;
  out.weight_sum = weight_sum;
  if (weight_sum < kMinCageWeight) return out;
  const Vec3 mean = sum / weight_sum;
  out.irradiance = mean * mean;  // back to linear
  out.valid = true;
  return out;
}

/// Per-axis linear ramp: 1 beyond `width` inside [lo, hi], falling to 0 at either end.
inline double ramp(double x, double lo, double hi, double width) {
  if (hi <= lo) return 0.0;
  const double d = std::min(x - lo, hi - x);
  if (width <= 0.0) return d >= 0.0 ? 1.0 : 0.0;
  return std::clamp(d / width, 0.0, 1.0);
}

/// Blend weight of `v` at `position`. Camera-aware weighting for tracking volumes tightens the
/// ramp region by one cell per axis and centers it on the camera.
inline double volume_blend_weight(const ProbeVolume& v, const Vec3& position, const Vec3& camera, bool camera_aware) {
  const Aabb b = v.bounds();
  double w = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double s = v.spacing()[a];
    double lo = b.lo[a], hi = b.hi[a];
    if (camera_aware && v.camera_tracking()) {
      const double half = 0.5 * (hi - lo) - s;
      lo = std::max(lo, camera[a] - half);
      hi = std::min(hi, camera[a] + half);
    }
    w *= ramp(position[a], lo, hi, s);
    if (w <= 0.0) return 0.0;
  }
  return w;
}

/// Volumes ordered densest first, each with its own query parameters.
class VolumeBlendSet {
 public:
  struct Entry {
    const ProbeVolume* volume;
    QueryParams params;
  };

  VolumeBlendSet() = default;
  explicit VolumeBlendSet(const std::vector<ProbeVolume>& volumes, const QueryParams& params = {})
      : VolumeBlendSet(volumes, std::vector<QueryParams>(volumes.size(), params)) {}
  VolumeBlendSet(const std::vector<ProbeVolume>& volumes, const std::vector<QueryParams>& params) {
    if (params.size() != volumes.size()) throw std::invalid_argument("VolumeBlendSet: one QueryParams per volume");
    for (std::size_t i = 0; i < volumes.size(); ++i) entries_.push_back({&volumes[i], params[i]});
    std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return a.volume->min_spacing() < b.volume->min_spacing();
    });
  }
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
};

struct BlendParams {
  bool camera_aware = true;
};

struct MultiSample {
  Rgb irradiance;
  double accumulated_weight = 0.0;
  bool valid = false;         // false: no volume produced a usable sample
  bool renormalized = false;  // total blend weight < 1 and the result was rescaled
};

inline MultiSample sample_multi_volume(const QueryPoint& q, const VolumeBlendSet& set, const Vec3& camera,
                                       const BlendParams& params = {}) {
  MultiSample out;
  for (const auto& [v, query] : set.entries()) {
    if (out.accumulated_weight >= 1.0) break;
    const double w = volume_blend_weight(*v, q.position, camera, params.camera_aware);
    if (w <= 0.0) continue;
    const VolumeSample s = sample_volume_irradiance(q, *v, query);
    if (!s.valid) continue;
    const double take = std::min(w, 1.0 - out.accumulated_weight);
    out.irradiance += s.irradiance * take;
    out.accumulated_weight += take;
  }
  if (out.accumulated_weight <= 0.0) return out;
  out.valid = true;
  if (out.accumulated_weight < 1.0 - 1e-12) {
    out.irradiance /= out.accumulated_weight;
    out.renormalized = true;
  }
  return out;
}

}  // namespace ddgi
