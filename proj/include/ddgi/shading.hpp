#pragma once

#include <numbers>

#include "ddgi/bvh.hpp"

namespace ddgi {

/// Lambertian reflected radiance from the analytic lights, with shadow rays.
/// `normal` must face the side being shaded.
inline Rgb direct_lighting(const Scene& scene, const Vec3& position, const Vec3& normal, const Rgb& albedo) {
  Rgb out;
  if (max_component(albedo) <= 0.0) return out;
  for (const Light& light : scene.lights) {
    if (!light.enabled) continue;
    Vec3 to_light;
    double dist = Scene::kInfinity;
    Rgb irradiance;
    if (light.kind == Light::Kind::kPoint) {
      to_light = light.position - position;
      dist = length(to_light);
      if (dist <= 0.0) continue;
      to_light /= dist;
      irradiance = light.intensity / (dist * dist);
    } else {
      to_light = -normalize(light.direction);
      irradiance = light.intensity;
    }
    const double cos_theta = dot(normal, to_light);
    if (cos_theta <= 0.0) continue;
    if (scene.occluded({position, to_light}, dist - kRayEpsilon)) continue;
    out += albedo * irradiance * (cos_theta / std::numbers::pi);
  }
  return out;
}

}  // namespace ddgi
