#pragma once

// Deferred shading with inline probe sampling, glossy reflections that reuse probe
// data at their hits, and the per-frame probe pipeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddgi/bvh.hpp"
#include "ddgi/parallel.hpp"
#include "ddgi/position_optimizer.hpp"
#include "ddgi/probe_query.hpp"
#include "ddgi/probe_states.hpp"
#include "ddgi/probe_update.hpp"
#include "ddgi/probe_volume.hpp"
#include "ddgi/shading.hpp"

namespace ddgi {

struct Camera {
  Vec3 position{0, 0, 0};
  Vec3 target{0, 0, -1};
  Vec3 up{0, 1, 0};
  double fov_y_degrees = 60.0;
  friend bool operator==(const Camera&, const Camera&) = default;

  /// Primary ray through the center of pixel (x, y); y grows downward.
  Ray primary_ray(int x, int y, int width, int height) const {
    const Vec3 f = normalize(target - position);
    const Vec3 r = normalize(cross(f, up));
    const Vec3 u = cross(r, f);
    const double th = std::tan(0.5 * fov_y_degrees * std::numbers::pi / 180.0);
    const double aspect = static_cast<double>(width) / height;
    const double sx = (2.0 * (x + 0.5) / width - 1.0) * th * aspect;
    const double sy = (1.0 - 2.0 * (y + 0.5) / height) * th;
    return {position, normalize(f + r * sx + u * sy)};
  }
};

struct FrameImage {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;  // row-major, linear

  FrameImage() = default;
  FrameImage(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0.f) {
    if (w < 1 || h < 1) throw std::invalid_argument("FrameImage: empty size");
  }
  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void set(int x, int y, const Rgb& c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    for (int k = 0; k < 3; ++k) rgb[i + k] = static_cast<float>(c[k]);
  }
  friend bool operator==(const FrameImage&, const FrameImage&) = default;
};

/// Root-mean-square per-channel difference.
inline double rms_difference(const FrameImage& a, const FrameImage& b) {
  if (a.width != b.width || a.height != b.height) throw std::invalid_argument("rms_difference: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.rgb.size()));
}

struct GBufferPixel {
  bool hit = false;  // false for sky pixels
  Vec3 position;
  UnitVec3 normal;  // geometric normal as wound
  UnitVec3 view;    // toward the viewer
  int material = 0;
  double depth = 0.0;
  bool frontface = true;
};

inline GBufferPixel make_gbuffer_pixel(const Scene& scene, const Ray& ray) {
  GBufferPixel px;
  const auto hit = scene.ray_cast(ray);
  if (!hit) return px;
  px.hit = true;
  px.position = hit->position;
  px.normal = UnitVec3::normalized(hit->normal);
  px.view = UnitVec3::normalized(-ray.direction);
  px.material = hit->material;
  px.depth = hit->t;
  px.frontface = hit->frontface;
  return px;
}

// Glossy lobe: a mirror for roughness 0, else a cosine-power lobe about the mirror direction
// with exponent 2/r^2 - 2. Sampled proportionally, so each sample carries weight glossy_reflectance.
inline double glossy_lobe_exponent(double roughness) { return 2.0 / (roughness * roughness) - 2.0; }

inline Vec3 sample_glossy_lobe(const Vec3& mirror, double roughness, double u1, double u2) {
  if (roughness <= 0.0) return mirror;
  const double e = std::max(0.0, glossy_lobe_exponent(std::min(roughness, 1.0)));
  const double cos_t = std::pow(u1, 1.0 / (e + 1.0));
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double phi = 2.0 * std::numbers::pi * u2;
  Vec3 t, b;
  make_basis(mirror, t, b);
  return normalize(t * (sin_t * std::cos(phi)) + b * (sin_t * std::sin(phi)) + mirror * cos_t);
}

inline constexpr int kGlossyLobeSamples = 4;

/// Fixed sample pattern used by glossy_trace; a single mirror sample when roughness is 0.
inline std::vector<std::pair<double, double>> glossy_sample_pattern(double roughness) {
  if (roughness <= 0.0) return {{0.0, 0.0}};
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < kGlossyLobeSamples; ++i) {
    const double u2 = i * kGoldenRatioConjugate;
    out.emplace_back((i + 0.5) / kGlossyLobeSamples, u2 - std::floor(u2));
  }
  return out;
}

struct ShadeInputs {
  const Scene* scene = nullptr;
  const VolumeBlendSet* volumes = nullptr;  // may be null or empty: no indirect term
  Vec3 camera;
  BlendParams blend;
  bool second_order_glossy = true;
};

struct ShadeResult {
  Rgb radiance;
  bool flagged = false;  // a probe query found no usable volume
};

inline bool has_probes(const ShadeInputs& in) { return in.volumes && !in.volumes->empty(); }

/// Radiance leaving a glossy ray's hit toward the ray origin. No further rays are traced:
/// diffuse indirect and the second-order glossy term both come from the probes.
inline ShadeResult shade_glossy_hit(const std::optional<Hit>& hit, const Ray& ray, const ShadeInputs& in) {
  ShadeResult out;
  if (!hit) {
    out.radiance = in.scene->environment;
    return out;
  }
  if (!hit->frontface) return out;
  const Material& m = in.scene->material(hit->material);
  out.radiance = m.emissive + direct_lighting(*in.scene, hit->position, hit->normal, m.albedo);
  if (!has_probes(in)) return out;
  const UnitVec3 view = UnitVec3::normalized(-ray.direction);
  if (max_component(m.albedo) > 0.0) {
    const MultiSample s =
        sample_multi_volume({hit->position, UnitVec3::normalized(hit->normal), view}, *in.volumes, in.camera, in.blend);
    if (s.valid) out.radiance += m.albedo * s.irradiance;
    else out.flagged = true;
  }
  if (in.second_order_glossy && m.is_glossy()) {
    // Stored texels are cosine-weighted mean radiance, reused as fully prefiltered radiance.
    const Vec3 r = reflect(ray.direction, hit->normal);
    const MultiSample s = sample_multi_volume({hit->position, UnitVec3::normalized(r), view}, *in.volumes, in.camera,
                                              in.blend);
    if (s.valid) out.radiance += m.glossy_reflectance * s.irradiance;
    else out.flagged = true;
  }
  return out;
}

/// Glossy reflection term of a g-buffer pixel, already scaled by its glossy reflectance.
inline ShadeResult glossy_trace(const GBufferPixel& px, const ShadeInputs& in) {
  ShadeResult out;
  const Material& m = in.scene->material(px.material);
  if (!m.is_glossy()) return out;
  const Vec3 mirror = reflect(-px.view.vec(), px.normal.vec());
  const auto pattern = glossy_sample_pattern(m.roughness);
  Rgb sum;
  for (const auto& [u1, u2] : pattern) {
    const Vec3 dir = sample_glossy_lobe(mirror, m.roughness, u1, u2);
    if (dot(dir, px.normal.vec()) <= 0.0) continue;
    const Ray ray{px.position, dir};
    const ShadeResult s = shade_glossy_hit(in.scene->ray_cast(ray), ray, in);
    sum += s.radiance;
    out.flagged = out.flagged || s.flagged;
  }
  out.radiance = m.glossy_reflectance * (sum / static_cast<double>(pattern.size()));
  return out;
}

/// Emissive + direct + probe-sampled diffuse indirect + glossy reflection.
inline ShadeResult deferred_shade(const GBufferPixel& px, const ShadeInputs& in) {
  ShadeResult out;
  if (!px.hit) {
    out.radiance = in.scene->environment;
    return out;
  }
  if (!px.frontface) return out;
  const Material& m = in.scene->material(px.material);
  out.radiance = m.emissive + direct_lighting(*in.scene, px.position, px.normal.vec(), m.albedo);
  if (has_probes(in) && max_component(m.albedo) > 0.0) {
    const MultiSample s = sample_multi_volume({px.position, px.normal, px.view}, *in.volumes, in.camera, in.blend);
    if (s.valid) out.radiance += m.albedo * s.irradiance;
    else out.flagged = true;
  }
  if (m.is_glossy()) {
    const ShadeResult g = glossy_trace(px, in);
    out.radiance += g.radiance;
    out.flagged = out.flagged || g.flagged;
  }
  return out;
}

struct FeatureToggles {
  bool sleeping = true;
  bool optimizer = true;
  bool heuristics = true;  // event-driven and per-texel hysteresis reductions
  bool second_order_glossy = true;
  bool camera_aware_blending = true;
  friend bool operator==(const FeatureToggles&, const FeatureToggles&) = default;
};

struct VolumeSettings {
  VolumeDesc desc;
  int rays_per_probe = kDefaultRaysPerProbe;
  double alpha_irradiance = kDefaultIrradianceHysteresis;
  double alpha_visibility = kDefaultVisibilityHysteresis;
  double self_shadow_bias = kDefaultSelfShadowBias;
  double gamma = kIrradianceGamma;
  double visibility_exponent = kDefaultVisibilityExponent;
  friend bool operator==(const VolumeSettings&, const VolumeSettings&) = default;

  QueryParams query() const { return {self_shadow_bias, gamma}; }
  UpdateParams update(bool texel_heuristics) const {
    return {rays_per_probe, visibility_exponent, gamma, texel_heuristics};
  }
};

struct RendererSettings {
  int width = 160;
  int height = 120;
  std::uint64_t seed = 1;
  int threads = 0;
  FeatureToggles features;
  ConvergeMode converge = ConvergeMode::kGradual;
  int burst_rays = 1024;
  int optimizer_rays = 256;
  bool static_aabb_fast_path = false;
  friend bool operator==(const RendererSettings&, const RendererSettings&) = default;
};

struct FrameStats {
  int frame = 0;
  std::int64_t rays_traced = 0;  // update + burst + optimizer rays
  std::int64_t update_rays = 0;
  std::int64_t burst_rays = 0;
  std::int64_t optimizer_rays = 0;
  std::array<std::int64_t, 6> state_counts{};  // indexed by ProbeState
  std::int64_t respawned = 0;
  std::int64_t wake_transitions = 0;
  std::int64_t flagged_pixels = 0;
  double irradiance_alpha = 0.0;  // effective scene-wide alpha of the first volume this frame
  double visibility_alpha = 0.0;
  UpdateStats update;
  std::vector<std::string> events;
};

/// Owns the probe volumes and runs the per-frame phases: tracking windows, initialization of
/// new probes, wake/sleep, convergence of new probes, the update (reading a previous-frame
/// snapshot), then shading.
class DdgiRenderer {
 public:
  DdgiRenderer(std::vector<VolumeSettings> volumes, RendererSettings settings)
      : settings_(std::move(settings)), volume_settings_(std::move(volumes)) {
    int id = 0;
    for (const auto& vs : volume_settings_) {
      volumes_.emplace_back(vs.desc, id++);
      hysteresis_.emplace_back(vs.alpha_irradiance, vs.alpha_visibility);
    }
  }

  const RendererSettings& settings() const { return settings_; }
  const std::vector<VolumeSettings>& volume_settings() const { return volume_settings_; }
  const std::vector<ProbeVolume>& volumes() const { return volumes_; }
  std::vector<ProbeVolume>& volumes() { return volumes_; }
  const std::vector<HysteresisState>& hysteresis() const { return hysteresis_; }
  int frame() const { return frame_; }

  std::vector<QueryParams> query_params() const {
    std::vector<QueryParams> q;
    for (const auto& vs : volume_settings_) q.push_back(vs.query());
    return q;
  }
  VolumeBlendSet blend_set() const { return VolumeBlendSet(volumes_, query_params()); }
  BlendParams blend_params() const { return {settings_.features.camera_aware_blending}; }

  /// Queues a scene event for the next update. Ignored when heuristics are disabled.
  void raise_event(SceneEvent e) {
    pending_events_.push_back(e);
    if (!settings_.features.heuristics) return;
    for (auto& h : hysteresis_) apply_event_heuristic(e, h);
  }

  /// Probe phases for one frame. `scene` must be committed with this frame's object transforms.
  FrameStats update_probes(const Scene& scene, const Vec3& camera) {
    FrameStats st;
    st.frame = frame_;
    for (SceneEvent e : pending_events_) st.events.emplace_back(to_string(e));
    pending_events_.clear();

    for (auto& v : volumes_)
      if (v.camera_tracking()) st.respawned += static_cast<std::int64_t>(v.update_tracking_window(camera).size());

    OptimizerOptions oo;
    oo.rays_per_probe = settings_.optimizer_rays;
    oo.enabled = settings_.features.optimizer;
    oo.static_aabb_fast_path = settings_.static_aabb_fast_path;
    oo.threads = settings_.threads;
    for (auto& v : volumes_) st.optimizer_rays += initialize_probes(v, scene, oo, settings_.features.sleeping).rays_traced;

    for (std::size_t i = 0; i < volumes_.size(); ++i) {
      ProbeVolume& v = volumes_[i];
      // Largest self-shadow bias vector: |0.2n + 0.8w| <= 1.
      const double bias_len = 0.75 * v.min_spacing() * volume_settings_[i].self_shadow_bias;
      std::vector<Aabb> bounds;
      for (const auto& obj : scene.objects) bounds.push_back(extended_aabb(obj, v.spacing(), bias_len));
      st.wake_transitions += wake_probes(v, bounds);
    }

    // Updates read last frame's probes, never the ones being written.
    const std::vector<ProbeVolume> snapshot = volumes_;
    const VolumeBlendSet previous(snapshot, query_params());
    const ShadeContext ctx{&scene, &previous, camera, blend_params()};

    const bool heuristics = settings_.features.heuristics;
    for (std::size_t i = 0; i < volumes_.size(); ++i) {
      ProbeVolume& v = volumes_[i];
      const VolumeSettings& vs = volume_settings_[i];
      const UpdateParams params = vs.update(heuristics);

      UpdateStats burst_stats;
      const ConvergeOptions co{settings_.converge, settings_.burst_rays, settings_.threads};
      const Rotation3 burst_rot = random_rotation(
          hash_combine(hash_combine(settings_.seed ^ 0xb0a57ull, static_cast<std::uint64_t>(frame_)), v.id()));
      const auto burst = converge_new_probes(v, co, ctx, burst_rot, params, burst_stats);
      st.burst_rays += burst_stats.rays_traced;
      st.update += burst_stats;

      std::vector<Int3> probes;
      for (const Int3& p : update_eligibility(v))
        if (std::find(burst.begin(), burst.end(), p) == burst.end()) probes.push_back(p);

      const double alpha_irr = heuristics ? hysteresis_[i].irradiance_alpha() : hysteresis_[i].base_irradiance();
      const double alpha_vis = heuristics ? hysteresis_[i].visibility_alpha() : hysteresis_[i].base_visibility();
      if (i == 0) {
        st.irradiance_alpha = alpha_irr;
        st.visibility_alpha = alpha_vis;
      }
      const Rotation3 rot = frame_rotation(settings_.seed, static_cast<std::uint64_t>(frame_), v.id());
      std::vector<UpdateStats> per(probes.size());
      parallel_for(static_cast<int>(probes.size()), settings_.threads, [&](int b, int e, int) {
        for (int k = b; k < e; ++k) {
          const auto idx = static_cast<std::size_t>(k);
          const UpdateRaySet rays = trace_probe_rays(v, probes[idx], rot, vs.rays_per_probe, ctx, per[idx]);
          // Distinct probes write distinct tiles and records.
          blend_probe(v, rays, alpha_irr, alpha_vis, params, per[idx]);
        }
      });
      for (const auto& s : per) {
        st.update_rays += s.rays_traced;
        st.update += s;
      }
      hysteresis_[i].end_frame();
    }

    for (const auto& v : volumes_)
      for (int k = 0; k < v.probe_count(); ++k) {
        const ProbeRecord& r = v.record(v.logical_from_linear(k));
        if (r.initialized) ++st.state_counts[static_cast<std::size_t>(r.state)];
      }
    st.rays_traced = st.update_rays + st.burst_rays + st.optimizer_rays;
    return st;
  }

  /// Shades the current probe data. Adds the flagged-pixel count to `stats` if given.
  FrameImage render(const Scene& scene, const Camera& camera, FrameStats* stats = nullptr) const {
    FrameImage img(settings_.width, settings_.height);
    const VolumeBlendSet set = blend_set();
    const ShadeInputs in{&scene, &set, camera.position, blend_params(), settings_.features.second_order_glossy};
    std::vector<std::int64_t> flags(static_cast<std::size_t>(img.height), 0);
    parallel_for(img.height, settings_.threads, [&](int b, int e, int) {
      for (int y = b; y < e; ++y)
        for (int x = 0; x < img.width; ++x) {
          const GBufferPixel px = make_gbuffer_pixel(scene, camera.primary_ray(x, y, img.width, img.height));
          const ShadeResult r = deferred_shade(px, in);
          img.set(x, y, r.radiance);
          if (r.flagged) ++flags[static_cast<std::size_t>(y)];
        }
    });
    if (stats)
      for (auto f : flags) stats->flagged_pixels += f;
    return img;
  }

  /// One full frame: probe phases, then shading. Advances the frame counter.
  FrameImage render_frame(const Scene& scene, const Camera& camera, FrameStats& stats) {
    stats = update_probes(scene, camera.position);
    FrameImage img = render(scene, camera, &stats);
    ++frame_;
    return img;
  }

  /// Advances the frame counter without shading.
  FrameStats step(const Scene& scene, const Vec3& camera) {
    FrameStats st = update_probes(scene, camera);
    ++frame_;
    return st;
  }

 private:
  RendererSettings settings_;
  std::vector<VolumeSettings> volume_settings_;
  std::vector<ProbeVolume> volumes_;
  std::vector<HysteresisState> hysteresis_;
  std::vector<SceneEvent> pending_events_;
  int frame_ = 0;
};

}  // namespace ddgi
