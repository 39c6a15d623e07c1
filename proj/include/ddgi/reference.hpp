#pragma once

// Path-traced ground truth: diffuse + glossy paths with next-event estimation to the
// analytic lights and Russian roulette. Surfaces are single-sided like the probe renderer.

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "ddgi/bvh.hpp"
#include "ddgi/parallel.hpp"
#include "ddgi/renderer.hpp"
#include "ddgi/shading.hpp"

namespace ddgi {

struct PathTraceOptions {
  int max_depth = 64;
  int roulette_depth = 3;
};

/// Radiance arriving along `ray` (leaving the first hit toward the ray origin).
inline Rgb trace_path(const Scene& scene, Ray ray, SplitMix64& rng, const PathTraceOptions& opt = {}) {
  Rgb radiance;
  Rgb throughput{1, 1, 1};
  for (int depth = 0; depth < opt.max_depth; ++depth) {
    const auto hit = scene.ray_cast(ray);
    if (!hit) {
      radiance += throughput * scene.environment;
      break;
    }
    if (!hit->frontface) break;
    const Material& m = scene.material(hit->material);
    radiance += throughput * (m.emissive + direct_lighting(scene, hit->position, hit->normal, m.albedo));

    const double pd = max_component(m.albedo), pg = max_component(m.glossy_reflectance);
    if (pd + pg <= 0.0) break;
    if (depth >= opt.roulette_depth) {
      const double survive = std::min(0.95, max_component(throughput));
      if (rng.uniform() >= survive) break;
      throughput /= survive;
    }
    const double p_diffuse = pd / (pd + pg);
    const double u = rng.uniform(), u1 = rng.uniform(), u2 = rng.uniform();
    Vec3 dir;
    if (u < p_diffuse) {
      dir = sample_cosine_hemisphere(hit->normal, u1, u2);
      throughput = throughput * m.albedo / p_diffuse;
    } else {
      dir = sample_glossy_lobe(reflect(ray.direction, hit->normal), m.roughness, u1, u2);
      if (dot(dir, hit->normal) <= 0.0) break;
      throughput = throughput * m.glossy_reflectance / (1.0 - p_diffuse);
    }
    ray = {hit->position, dir};
  }
  return radiance;
}

/// Cosine-weighted mean incident radiance at a surface point: the quantity the probes store
/// (irradiance / pi). Point-light contributions arrive through the paths' surface hits only.
inline Rgb reference_irradiance(const Scene& scene, const Vec3& position, const Vec3& normal, int samples,
                                std::uint64_t seed, const PathTraceOptions& opt = {}) {
  SplitMix64 rng(seed);
  Rgb sum;
  for (int i = 0; i < samples; ++i) {
    const Vec3 dir = sample_cosine_hemisphere(normal, rng.uniform(), rng.uniform());
    sum += trace_path(scene, {position, dir}, rng, opt);
  }
  return sum / static_cast<double>(samples);
}

/// Path-traced render plus the per-pixel variance of its estimate.
struct ReferenceImage {
  FrameImage image;
  FrameImage variance_of_mean;  // per-channel variance of the pixel estimate
};

inline ReferenceImage reference_path_trace_with_variance(const Scene& scene, const Camera& camera, int width,
                                                         int height, int spp, std::uint64_t seed, int threads = 0,
                                                         const PathTraceOptions& opt = {}) {
  if (spp < 1) throw std::invalid_argument("reference_path_trace: spp must be >= 1");
  ReferenceImage out{FrameImage(width, height), FrameImage(width, height)};
  parallel_for(height, threads, [&](int b, int e, int) {
    for (int y = b; y < e; ++y)
      for (int x = 0; x < width; ++x) {
        SplitMix64 rng(hash_combine(seed, static_cast<std::uint64_t>(y) * width + x));
        const Ray primary = camera.primary_ray(x, y, width, height);
        Rgb sum, sum_sq;
        for (int s = 0; s < spp; ++s) {
          const Rgb l = trace_path(scene, primary, rng, opt);
          sum += l;
          sum_sq += l * l;
        }
        const Rgb mean = sum / static_cast<double>(spp);
        Rgb var;
        if (spp > 1)
          for (int c = 0; c < 3; ++c)
            var[c] = std::max(0.0, (sum_sq[c] - spp * mean[c] * mean[c]) / (spp - 1.0)) / spp;
        out.image.set(x, y, mean);
        out.variance_of_mean.set(x, y, var);
      }
  });
  return out;
}

inline FrameImage reference_path_trace(const Scene& scene, const Camera& camera, int width, int height, int spp,
                                       std::uint64_t seed, int threads = 0, const PathTraceOptions& opt = {}) {
  return reference_path_trace_with_variance(scene, camera, width, height, spp, seed, threads, opt).image;
}

}  // namespace ddgi
