#pragma once

// JSON run configuration: scene primitives, probe volumes, renderer settings,
// feature toggles, outputs and the frame script (camera keys, object tracks,
// scene events). Unknown keys are rejected with the JSON path of the offender.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddgi/geometry.hpp"
#include "ddgi/obj_loader.hpp"
#include "ddgi/renderer.hpp"

namespace ddgi {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct PrimitiveDesc {
  std::string type = "box";  // room | box | quad | obj
  std::string material;
  Vec3 min, max;                        // room, box
  std::map<std::string, std::string> faces;  // room/box per-face materials: -x +x -y +y -z +z
  Vec3 corner, edge1, edge2;            // quad
  std::string path;                     // obj
  double scale = 1.0;                   // obj
  Vec3 translate;                       // obj
  friend bool operator==(const PrimitiveDesc&, const PrimitiveDesc&) = default;
};

struct ObjectDesc {
  std::string name;
  std::vector<PrimitiveDesc> geometry;  // local space
  Vec3 position;
  double rotation_y_degrees = 0.0;
  friend bool operator==(const ObjectDesc&, const ObjectDesc&) = default;
};

struct SceneDesc {
  std::vector<Material> materials;
  std::vector<Light> lights;
  Rgb environment;
  std::vector<PrimitiveDesc> geometry;  // static
  std::vector<ObjectDesc> objects;
  friend bool operator==(const SceneDesc&, const SceneDesc&) = default;
};

struct CameraKey {
  int frame = 0;
  Vec3 position;
  Vec3 target;
  friend bool operator==(const CameraKey&, const CameraKey&) = default;
};

struct ObjectKey {
  int frame = 0;
  Vec3 position;
  double rotation_y_degrees = 0.0;
  friend bool operator==(const ObjectKey&, const ObjectKey&) = default;
};

struct ObjectTrack {
  std::string object;
  std::vector<ObjectKey> keys;
  friend bool operator==(const ObjectTrack&, const ObjectTrack&) = default;
};

struct LightChange {
  std::string light;
  std::optional<bool> enabled;
  std::optional<Rgb> intensity;
  std::optional<Vec3> position;
  std::optional<Vec3> direction;
  friend bool operator==(const LightChange&, const LightChange&) = default;
};

struct EventDesc {
  int frame = 0;
  SceneEvent type = SceneEvent::kSmallLight;
  std::vector<LightChange> lights;
  friend bool operator==(const EventDesc&, const EventDesc&) = default;
};

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a + (b - a) * t; }

/// Piecewise-linear lookup over keys sorted by frame, clamped at both ends.
template <class Key, class Fn>
auto interpolate_keys(const std::vector<Key>& keys, int frame, Fn&& blend) {
  if (frame <= keys.front().frame) return blend(keys.front(), keys.front(), 0.0);
  if (frame >= keys.back().frame) return blend(keys.back(), keys.back(), 0.0);
  std::size_t i = 1;
  while (keys[i].frame < frame) ++i;
  const Key& a = keys[i - 1];
  const Key& b = keys[i];
  return blend(a, b, static_cast<double>(frame - a.frame) / (b.frame - a.frame));
}

struct FrameScript {
  int frames = 1;
  Camera camera;  // base camera; keys override position and target
  std::vector<CameraKey> camera_keys;
  std::vector<ObjectTrack> object_tracks;
  std::vector<EventDesc> events;
  friend bool operator==(const FrameScript&, const FrameScript&) = default;

  Camera camera_at(int frame) const {
    Camera c = camera;
    if (camera_keys.empty()) return c;
    const auto [p, t] = interpolate_keys(camera_keys, frame, [](const CameraKey& a, const CameraKey& b, double s) {
      return std::pair{lerp(a.position, b.position, s), lerp(a.target, b.target, s)};
    });
    c.position = p;
    c.target = t;
    return c;
  }
};

struct OutputSettings {
  std::string dir = "out";
  bool pfm = true;
  bool png = true;
  bool dump_atlas = false;
  bool dump_states = false;
  int compare_oracle_every = 0;  // 0 disables oracle renders
  int oracle_spp = 64;
  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct RunConfig {
  RendererSettings renderer;
  std::vector<VolumeSettings> volumes;
  OutputSettings output;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ConfigDocument {
  RunConfig run;
  SceneDesc scene;
  FrameScript script;
  std::string base_dir = ".";  // resolves relative OBJ paths; not serialized
  friend bool operator==(const ConfigDocument& a, const ConfigDocument& b) {
    return a.run == b.run && a.scene == b.scene && a.script == b.script;
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace config_detail {

inline std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError(child(path, key), "unknown key");
  }
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

inline std::uint64_t unsigned_integer(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline Vec3 vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected an array of 3 numbers");
  return {number(j[0], child(path, 0)), number(j[1], child(path, 1)), number(j[2], child(path, 2))};
}

inline Int3 int3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected an array of 3 integers");
  return {integer(j[0], child(path, 0)), integer(j[1], child(path, 1)), integer(j[2], child(path, 2))};
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  return j;
}

template <class T, class Fn>
void optional_field(const json& obj, const std::string& path, const char* key, T& out, Fn&& read) {
  if (obj.contains(key)) out = read(obj.at(key), child(path, key));
}

inline SceneEvent parse_event_type(const std::string& s, const std::string& path) {
  if (s == "small_light") return SceneEvent::kSmallLight;
  if (s == "large_light") return SceneEvent::kLargeLight;
  if (s == "large_object") return SceneEvent::kLargeObject;
  throw ConfigError(path, "unknown event type '" + s + "' (small_light, large_light, large_object)");
}

inline PrimitiveDesc parse_primitive(const json& j, const std::string& path) {
  check_keys(j, path, {"type", "material", "min", "max", "faces", "corner", "edge1", "edge2", "path", "scale", "translate"});
  PrimitiveDesc p;
  if (!j.contains("type")) throw ConfigError(child(path, "type"), "missing");
  p.type = string(j.at("type"), child(path, "type"));
  optional_field(j, path, "material", p.material, string);
  if (p.type == "room" || p.type == "box") {
    for (const char* k : {"min", "max"})
      if (!j.contains(k)) throw ConfigError(child(path, k), "missing");
    p.min = vec3(j.at("min"), child(path, "min"));
    p.max = vec3(j.at("max"), child(path, "max"));
    if (!(p.min.x < p.max.x && p.min.y < p.max.y && p.min.z < p.max.z))
      throw ConfigError(child(path, "max"), "must exceed min on every axis");
    if (j.contains("faces")) {
      const std::string fp = child(path, "faces");
      check_keys(j.at("faces"), fp, {"-x", "+x", "-y", "+y", "-z", "+z"});
      for (const auto& [k, v] : j.at("faces").items()) p.faces[k] = string(v, child(fp, k));
    }
  } else if (p.type == "quad") {
    for (const char* k : {"corner", "edge1", "edge2"})
      if (!j.contains(k)) throw ConfigError(child(path, k), "missing");
    p.corner = vec3(j.at("corner"), child(path, "corner"));
    p.edge1 = vec3(j.at("edge1"), child(path, "edge1"));
    p.edge2 = vec3(j.at("edge2"), child(path, "edge2"));
    if (length(cross(p.edge1, p.edge2)) <= 0.0) throw ConfigError(child(path, "edge2"), "quad is degenerate");
  } else if (p.type == "obj") {
    if (!j.contains("path")) throw ConfigError(child(path, "path"), "missing");
    p.path = string(j.at("path"), child(path, "path"));
    optional_field(j, path, "scale", p.scale, number);
    optional_field(j, path, "translate", p.translate, vec3);
  } else {
    throw ConfigError(child(path, "type"), "unknown primitive '" + p.type + "' (room, box, quad, obj)");
  }
  return p;
}

inline std::vector<PrimitiveDesc> parse_primitives(const json& j, const std::string& path) {
  std::vector<PrimitiveDesc> out;
  const json& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(parse_primitive(a[i], child(path, i)));
  return out;
}

inline Material parse_material(const json& j, const std::string& path) {
  check_keys(j, path, {"name", "albedo", "emissive", "glossy", "roughness"});
  Material m;
  if (!j.contains("name")) throw ConfigError(child(path, "name"), "missing");
  m.name = string(j.at("name"), child(path, "name"));
  optional_field(j, path, "albedo", m.albedo, vec3);
  optional_field(j, path, "emissive", m.emissive, vec3);
  optional_field(j, path, "glossy", m.glossy_reflectance, vec3);
  optional_field(j, path, "roughness", m.roughness, number);
  for (int c = 0; c < 3; ++c) {
    if (m.albedo[c] < 0 || m.emissive[c] < 0 || m.glossy_reflectance[c] < 0)
      throw ConfigError(path, "material values must be non-negative");
  }
  if (!m.energy_conserving()) throw ConfigError(child(path, "glossy"), "albedo + glossy exceeds 1");
  if (m.roughness < 0.0 || m.roughness > 1.0) throw ConfigError(child(path, "roughness"), "must be in [0, 1]");
  return m;
}

inline Light parse_light(const json& j, const std::string& path) {
  check_keys(j, path, {"name", "type", "intensity", "position", "direction", "enabled"});
  Light l;
  optional_field(j, path, "name", l.name, string);
  std::string type = "point";
  optional_field(j, path, "type", type, string);
  if (type == "point") l.kind = Light::Kind::kPoint;
  else if (type == "directional") l.kind = Light::Kind::kDirectional;
  else throw ConfigError(child(path, "type"), "unknown light type '" + type + "' (point, directional)");
  optional_field(j, path, "intensity", l.intensity, vec3);
  optional_field(j, path, "position", l.position, vec3);
  optional_field(j, path, "direction", l.direction, vec3);
  optional_field(j, path, "enabled", l.enabled, boolean);
  if (length(l.direction) <= 0.0) throw ConfigError(child(path, "direction"), "must be non-zero");
  return l;
}

inline VolumeSettings parse_volume(const json& j, const std::string& path) {
  check_keys(j, path, {"name", "counts", "spacing", "origin", "camera_tracking", "rays_per_probe", "alpha_irradiance",
                       "alpha_visibility", "self_shadow_bias", "gamma", "visibility_exponent", "offset_limit"});
  VolumeSettings v;
  optional_field(j, path, "name", v.desc.name, string);
  optional_field(j, path, "counts", v.desc.counts, int3);
  optional_field(j, path, "spacing", v.desc.spacing, vec3);
  optional_field(j, path, "origin", v.desc.origin, vec3);
  optional_field(j, path, "camera_tracking", v.desc.camera_tracking, boolean);
  optional_field(j, path, "offset_limit", v.desc.offset_limit, number);
  optional_field(j, path, "rays_per_probe", v.rays_per_probe, integer);
  optional_field(j, path, "alpha_irradiance", v.alpha_irradiance, number);
  optional_field(j, path, "alpha_visibility", v.alpha_visibility, number);
  optional_field(j, path, "self_shadow_bias", v.self_shadow_bias, number);
  optional_field(j, path, "gamma", v.gamma, number);
  optional_field(j, path, "visibility_exponent", v.visibility_exponent, number);

  for (int a = 0; a < 3; ++a) {
    if (v.desc.counts[a] < 2) throw ConfigError(child(path, "counts"), "need at least 2 probes per axis");
    if (!(v.desc.spacing[a] > 0.0)) throw ConfigError(child(path, "spacing"), "spacing must be positive");
  }
  if (!(v.desc.offset_limit >= 0.0 && v.desc.offset_limit < 0.5))
    throw ConfigError(child(path, "offset_limit"), "must be in [0, 0.5)");
  if (v.rays_per_probe < 1) throw ConfigError(child(path, "rays_per_probe"), "must be >= 1");
  if (!(v.alpha_irradiance >= 0.0 && v.alpha_irradiance < 1.0))
    throw ConfigError(child(path, "alpha_irradiance"), "must be in [0, 1)");
  if (!(v.alpha_visibility >= 0.0 && v.alpha_visibility < 1.0))
    throw ConfigError(child(path, "alpha_visibility"), "must be in [0, 1)");
  if (v.self_shadow_bias < 0.0) throw ConfigError(child(path, "self_shadow_bias"), "must be non-negative");
  if (!(v.gamma > 0.0)) throw ConfigError(child(path, "gamma"), "must be positive");
  if (v.visibility_exponent < 0.0) throw ConfigError(child(path, "visibility_exponent"), "must be non-negative");
  return v;
}

inline Camera parse_camera(const json& j, const std::string& path) {
  check_keys(j, path, {"position", "target", "up", "fov_y"});
  Camera c;
  optional_field(j, path, "position", c.position, vec3);
  optional_field(j, path, "target", c.target, vec3);
  optional_field(j, path, "up", c.up, vec3);
  optional_field(j, path, "fov_y", c.fov_y_degrees, number);
  if (!(c.fov_y_degrees > 0.0 && c.fov_y_degrees < 180.0)) throw ConfigError(child(path, "fov_y"), "must be in (0, 180)");
  if (length(c.target - c.position) <= 0.0) throw ConfigError(child(path, "target"), "must differ from position");
  return c;
}

template <class Key>
void check_sorted(const std::vector<Key>& keys, const std::string& path) {
  for (std::size_t i = 1; i < keys.size(); ++i)
    if (keys[i].frame <= keys[i - 1].frame) throw ConfigError(child(path, i), "keyframes must be sorted by frame");
}

inline FrameScript parse_script(const json& j, const std::string& path, const Camera& base) {
  check_keys(j, path, {"frames", "camera_keys", "object_tracks", "events"});
  FrameScript s;
  s.camera = base;
  optional_field(j, path, "frames", s.frames, integer);
  if (s.frames < 1) throw ConfigError(child(path, "frames"), "must be >= 1");
  if (j.contains("camera_keys")) {
    const std::string kp = child(path, "camera_keys");
    const json& a = array(j.at("camera_keys"), kp);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string ip = child(kp, i);
      check_keys(a[i], ip, {"frame", "position", "target"});
      CameraKey k;
      k.position = base.position;
      k.target = base.target;
      optional_field(a[i], ip, "frame", k.frame, integer);
      optional_field(a[i], ip, "position", k.position, vec3);
      optional_field(a[i], ip, "target", k.target, vec3);
      s.camera_keys.push_back(k);
    }
    check_sorted(s.camera_keys, kp);
  }
  if (j.contains("object_tracks")) {
    const std::string tp = child(path, "object_tracks");
    const json& a = array(j.at("object_tracks"), tp);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string ip = child(tp, i);
      check_keys(a[i], ip, {"object", "keys"});
      ObjectTrack t;
      if (!a[i].contains("object")) throw ConfigError(child(ip, "object"), "missing");
      t.object = string(a[i].at("object"), child(ip, "object"));
      const std::string kp = child(ip, "keys");
      if (!a[i].contains("keys")) throw ConfigError(kp, "missing");
      const json& keys = array(a[i].at("keys"), kp);
      for (std::size_t k = 0; k < keys.size(); ++k) {
        const std::string kkp = child(kp, k);
        check_keys(keys[k], kkp, {"frame", "position", "rotation_y_degrees"});
        ObjectKey key;
        optional_field(keys[k], kkp, "frame", key.frame, integer);
        optional_field(keys[k], kkp, "position", key.position, vec3);
        optional_field(keys[k], kkp, "rotation_y_degrees", key.rotation_y_degrees, number);
        t.keys.push_back(key);
      }
      if (t.keys.empty()) throw ConfigError(kp, "need at least one key");
      check_sorted(t.keys, kp);
      s.object_tracks.push_back(std::move(t));
    }
  }
  if (j.contains("events")) {
    const std::string ep = child(path, "events");
    const json& a = array(j.at("events"), ep);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string ip = child(ep, i);
      check_keys(a[i], ip, {"frame", "type", "lights"});
      EventDesc e;
      optional_field(a[i], ip, "frame", e.frame, integer);
      if (!a[i].contains("type")) throw ConfigError(child(ip, "type"), "missing");
      e.type = parse_event_type(string(a[i].at("type"), child(ip, "type")), child(ip, "type"));
      if (a[i].contains("lights")) {
        const std::string lp = child(ip, "lights");
        const json& la = array(a[i].at("lights"), lp);
        for (std::size_t k = 0; k < la.size(); ++k) {
          const std::string kp = child(lp, k);
          check_keys(la[k], kp, {"light", "enabled", "intensity", "position", "direction"});
          LightChange c;
          if (!la[k].contains("light")) throw ConfigError(child(kp, "light"), "missing");
          c.light = string(la[k].at("light"), child(kp, "light"));
          if (la[k].contains("enabled")) c.enabled = boolean(la[k].at("enabled"), child(kp, "enabled"));
          if (la[k].contains("intensity")) c.intensity = vec3(la[k].at("intensity"), child(kp, "intensity"));
          if (la[k].contains("position")) c.position = vec3(la[k].at("position"), child(kp, "position"));
          if (la[k].contains("direction")) c.direction = vec3(la[k].at("direction"), child(kp, "direction"));
          e.lights.push_back(c);
        }
      }
      s.events.push_back(std::move(e));
    }
  }
  return s;
}

inline ConvergeMode parse_converge(const std::string& s, const std::string& path) {
  if (s == "gradual") return ConvergeMode::kGradual;
  if (s == "burst") return ConvergeMode::kBurst;
  throw ConfigError(path, "unknown convergence mode '" + s + "' (gradual, burst)");
}

inline bool has_material(const SceneDesc& s, const std::string& name) {
  return std::any_of(s.materials.begin(), s.materials.end(), [&](const Material& m) { return m.name == name; });
}

inline void check_primitive_materials(const SceneDesc& s, const std::vector<PrimitiveDesc>& prims,
                                      const std::string& path) {
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const std::string ip = child(path, i);
    if (!has_material(s, prims[i].material))
      throw ConfigError(child(ip, "material"), "unknown material '" + prims[i].material + "'");
    for (const auto& [face, name] : prims[i].faces)
      if (!has_material(s, name)) throw ConfigError(child(child(ip, "faces"), face), "unknown material '" + name + "'");
  }
}

}  // namespace config_detail

/// Parses and validates a configuration document. `base_dir` resolves relative OBJ paths.
inline ConfigDocument parse_config(const json& root, const std::string& base_dir = ".") {
  using namespace config_detail;
  const std::string path;
  check_keys(root, "", {"render", "features", "output", "materials", "lights", "environment", "geometry", "objects",
                        "volumes", "camera", "script"});
  ConfigDocument doc;
  doc.base_dir = base_dir;
  RendererSettings& rs = doc.run.renderer;

  if (root.contains("render")) {
    const json& r = root.at("render");
    const std::string rp = "/render";
    check_keys(r, rp, {"width", "height", "seed", "threads", "converge", "burst_rays", "optimizer_rays",
                       "static_aabb_fast_path"});
    optional_field(r, rp, "width", rs.width, integer);
    optional_field(r, rp, "height", rs.height, integer);
    optional_field(r, rp, "seed", rs.seed, unsigned_integer);
    optional_field(r, rp, "threads", rs.threads, integer);
    if (r.contains("converge")) rs.converge = parse_converge(string(r.at("converge"), rp + "/converge"), rp + "/converge");
    optional_field(r, rp, "burst_rays", rs.burst_rays, integer);
    optional_field(r, rp, "optimizer_rays", rs.optimizer_rays, integer);
    optional_field(r, rp, "static_aabb_fast_path", rs.static_aabb_fast_path, boolean);
    if (rs.width < 1 || rs.height < 1) throw ConfigError(rp, "width and height must be >= 1");
    if (rs.burst_rays < 1) throw ConfigError(rp + "/burst_rays", "must be >= 1");
    if (rs.optimizer_rays < 1) throw ConfigError(rp + "/optimizer_rays", "must be >= 1");
  }
  if (root.contains("features")) {
    const json& f = root.at("features");
    const std::string fp = "/features";
    check_keys(f, fp, {"sleeping", "optimizer", "heuristics", "second_order_glossy", "camera_aware_blending"});
    optional_field(f, fp, "sleeping", rs.features.sleeping, boolean);
    optional_field(f, fp, "optimizer", rs.features.optimizer, boolean);
    optional_field(f, fp, "heuristics", rs.features.heuristics, boolean);
    optional_field(f, fp, "second_order_glossy", rs.features.second_order_glossy, boolean);
    optional_field(f, fp, "camera_aware_blending", rs.features.camera_aware_blending, boolean);
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    const std::string op = "/output";
    check_keys(o, op, {"dir", "pfm", "png", "dump_atlas", "dump_states", "compare_oracle_every", "oracle_spp"});
    OutputSettings& out = doc.run.output;
    optional_field(o, op, "dir", out.dir, string);
    optional_field(o, op, "pfm", out.pfm, boolean);
    optional_field(o, op, "png", out.png, boolean);
    optional_field(o, op, "dump_atlas", out.dump_atlas, boolean);
    optional_field(o, op, "dump_states", out.dump_states, boolean);
    optional_field(o, op, "compare_oracle_every", out.compare_oracle_every, integer);
    optional_field(o, op, "oracle_spp", out.oracle_spp, integer);
    if (out.compare_oracle_every < 0) throw ConfigError(op + "/compare_oracle_every", "must be >= 0");
    if (out.oracle_spp < 1) throw ConfigError(op + "/oracle_spp", "must be >= 1");
  }

  SceneDesc& sd = doc.scene;
  if (root.contains("materials")) {
    const json& a = array(root.at("materials"), "/materials");
    for (std::size_t i = 0; i < a.size(); ++i) {
      Material m = parse_material(a[i], child("/materials", i));
      if (has_material(sd, m.name)) throw ConfigError(child(child("/materials", i), "name"), "duplicate material");
      sd.materials.push_back(std::move(m));
    }
  }
  if (root.contains("lights")) {
    const json& a = array(root.at("lights"), "/lights");
    for (std::size_t i = 0; i < a.size(); ++i) sd.lights.push_back(parse_light(a[i], child("/lights", i)));
  }
  optional_field(root, path, "environment", sd.environment, vec3);
  if (root.contains("geometry")) sd.geometry = parse_primitives(root.at("geometry"), "/geometry");
  check_primitive_materials(sd, sd.geometry, "/geometry");
  if (root.contains("objects")) {
    const json& a = array(root.at("objects"), "/objects");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string ip = child("/objects", i);
      check_keys(a[i], ip, {"name", "geometry", "position", "rotation_y_degrees"});
      ObjectDesc o;
      if (!a[i].contains("name")) throw ConfigError(child(ip, "name"), "missing");
      o.name = string(a[i].at("name"), child(ip, "name"));
      if (!a[i].contains("geometry")) throw ConfigError(child(ip, "geometry"), "missing");
      o.geometry = parse_primitives(a[i].at("geometry"), child(ip, "geometry"));
      check_primitive_materials(sd, o.geometry, child(ip, "geometry"));
      optional_field(a[i], ip, "position", o.position, vec3);
      optional_field(a[i], ip, "rotation_y_degrees", o.rotation_y_degrees, number);
      sd.objects.push_back(std::move(o));
    }
  }

  if (root.contains("volumes")) {
    const json& a = array(root.at("volumes"), "/volumes");
    for (std::size_t i = 0; i < a.size(); ++i) doc.run.volumes.push_back(parse_volume(a[i], child("/volumes", i)));
  }

  Camera base;
  if (root.contains("camera")) base = parse_camera(root.at("camera"), "/camera");
  doc.script.camera = base;
  if (root.contains("script")) doc.script = parse_script(root.at("script"), "/script", base);

  for (std::size_t i = 0; i < doc.script.object_tracks.size(); ++i) {
    const std::string& name = doc.script.object_tracks[i].object;
    const bool found = std::any_of(sd.objects.begin(), sd.objects.end(), [&](const ObjectDesc& o) { return o.name == name; });
    if (!found) throw ConfigError(child(child("/script/object_tracks", i), "object"), "unknown object '" + name + "'");
  }
  for (std::size_t i = 0; i < doc.script.events.size(); ++i)
    for (std::size_t k = 0; k < doc.script.events[i].lights.size(); ++k) {
      const std::string& name = doc.script.events[i].lights[k].light;
      const bool found = std::any_of(sd.lights.begin(), sd.lights.end(), [&](const Light& l) { return l.name == name; });
      if (!found)
        throw ConfigError(child(child(child(child("/script/events", i), "lights"), k), "light"),
                          "unknown light '" + name + "'");
    }
  return doc;
}

inline ConfigDocument load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_config: cannot open " + file);
  json root;
  try {
    root = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(file + ": " + e.what());
  }
  const auto dir = std::filesystem::path(file).parent_path();
  return parse_config(root, dir.empty() ? "." : dir.string());
}

// ---------------------------------------------------------------------------
// Serialization

namespace config_detail {

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
inline json to_json(const Int3& v) { return json::array({v.x, v.y, v.z}); }

inline json to_json(const PrimitiveDesc& p) {
  json j{{"type", p.type}, {"material", p.material}};
  if (p.type == "room" || p.type == "box") {
    j["min"] = to_json(p.min);
    j["max"] = to_json(p.max);
    if (!p.faces.empty()) j["faces"] = p.faces;
  } else if (p.type == "quad") {
    j["corner"] = to_json(p.corner);
    j["edge1"] = to_json(p.edge1);
    j["edge2"] = to_json(p.edge2);
  } else {
    j["path"] = p.path;
    j["scale"] = p.scale;
    j["translate"] = to_json(p.translate);
  }
  return j;
}

}  // namespace config_detail

inline json serialize_config(const ConfigDocument& doc) {
  using config_detail::to_json;
  const RendererSettings& rs = doc.run.renderer;
  json root;
  root["render"] = {{"width", rs.width},
                    {"height", rs.height},
                    {"seed", rs.seed},
                    {"threads", rs.threads},
                    {"converge", rs.converge == ConvergeMode::kBurst ? "burst" : "gradual"},
                    {"burst_rays", rs.burst_rays},
                    {"optimizer_rays", rs.optimizer_rays},
                    {"static_aabb_fast_path", rs.static_aabb_fast_path}};
  root["features"] = {{"sleeping", rs.features.sleeping},
                      {"optimizer", rs.features.optimizer},
                      {"heuristics", rs.features.heuristics},
                      {"second_order_glossy", rs.features.second_order_glossy},
                      {"camera_aware_blending", rs.features.camera_aware_blending}};
  const OutputSettings& o = doc.run.output;
  root["output"] = {{"dir", o.dir},
                    {"pfm", o.pfm},
                    {"png", o.png},
                    {"dump_atlas", o.dump_atlas},
                    {"dump_states", o.dump_states},
                    {"compare_oracle_every", o.compare_oracle_every},
                    {"oracle_spp", o.oracle_spp}};
  root["materials"] = json::array();
  for (const Material& m : doc.scene.materials)
    root["materials"].push_back({{"name", m.name},
                                 {"albedo", to_json(m.albedo)},
                                 {"emissive", to_json(m.emissive)},
                                 {"glossy", to_json(m.glossy_reflectance)},
                                 {"roughness", m.roughness}});
  root["lights"] = json::array();
  for (const Light& l : doc.scene.lights)
    root["lights"].push_back({{"name", l.name},
                              {"type", l.kind == Light::Kind::kPoint ? "point" : "directional"},
                              {"intensity", to_json(l.intensity)},
                              {"position", to_json(l.position)},
                              {"direction", to_json(l.direction)},
                              {"enabled", l.enabled}});
  root["environment"] = to_json(doc.scene.environment);
  root["geometry"] = json::array();
  for (const auto& p : doc.scene.geometry) root["geometry"].push_back(to_json(p));
  root["objects"] = json::array();
  for (const auto& ob : doc.scene.objects) {
    json g = json::array();
    for (const auto& p : ob.geometry) g.push_back(to_json(p));
    root["objects"].push_back({{"name", ob.name},
                               {"geometry", g},
                               {"position", to_json(ob.position)},
                               {"rotation_y_degrees", ob.rotation_y_degrees}});
  }
  root["volumes"] = json::array();
  for (const VolumeSettings& v : doc.run.volumes)
    root["volumes"].push_back({{"name", v.desc.name},
                               {"counts", to_json(v.desc.counts)},
                               {"spacing", to_json(v.desc.spacing)},
                               {"origin", to_json(v.desc.origin)},
                               {"camera_tracking", v.desc.camera_tracking},
                               {"offset_limit", v.desc.offset_limit},
                               {"rays_per_probe", v.rays_per_probe},
                               {"alpha_irradiance", v.alpha_irradiance},
                               {"alpha_visibility", v.alpha_visibility},
                               {"self_shadow_bias", v.self_shadow_bias},
                               {"gamma", v.gamma},
                               {"visibility_exponent", v.visibility_exponent}});
  const Camera& c = doc.script.camera;
  root["camera"] = {{"position", to_json(c.position)},
                    {"target", to_json(c.target)},
                    {"up", to_json(c.up)},
                    {"fov_y", c.fov_y_degrees}};
  json script{{"frames", doc.script.frames}};
  script["camera_keys"] = json::array();
  for (const auto& k : doc.script.camera_keys)
    script["camera_keys"].push_back({{"frame", k.frame}, {"position", to_json(k.position)}, {"target", to_json(k.target)}});
  script["object_tracks"] = json::array();
  for (const auto& t : doc.script.object_tracks) {
    json keys = json::array();
    for (const auto& k : t.keys)
      keys.push_back({{"frame", k.frame}, {"position", to_json(k.position)}, {"rotation_y_degrees", k.rotation_y_degrees}});
    script["object_tracks"].push_back({{"object", t.object}, {"keys", keys}});
  }
  script["events"] = json::array();
  for (const auto& e : doc.script.events) {
    json lights = json::array();
    for (const auto& l : e.lights) {
      json lj{{"light", l.light}};
      if (l.enabled) lj["enabled"] = *l.enabled;
      if (l.intensity) lj["intensity"] = to_json(*l.intensity);
      if (l.position) lj["position"] = to_json(*l.position);
      if (l.direction) lj["direction"] = to_json(*l.direction);
      lights.push_back(lj);
    }
    script["events"].push_back({{"frame", e.frame}, {"type", to_string(e.type)}, {"lights", lights}});
  }
  root["script"] = script;
  return root;
}

// ---------------------------------------------------------------------------
// Scene assembly and replay

namespace config_detail {

inline int material_index(const SceneDesc& s, const std::string& name) {
  for (std::size_t i = 0; i < s.materials.size(); ++i)
    if (s.materials[i].name == name) return static_cast<int>(i);
  throw std::invalid_argument("unknown material '" + name + "'");
}

inline std::vector<Triangle> primitive_triangles(const SceneDesc& s, const PrimitiveDesc& p, const std::string& base_dir) {
  const int m = material_index(s, p.material);
  if (p.type == "quad") return make_quad(p.corner, p.edge1, p.edge2, m);
  if (p.type == "obj") {
    std::filesystem::path file(p.path);
    if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
    auto tris = load_obj(file.string(), m);
    for (Triangle& t : tris) {
      t.v0 = t.v0 * p.scale + p.translate;
      t.v1 = t.v1 * p.scale + p.translate;
      t.v2 = t.v2 * p.scale + p.translate;
    }
    return tris;
  }
  std::array<int, 6> faces{m, m, m, m, m, m};
  const char* names[6] = {"-x", "+x", "-y", "+y", "-z", "+z"};
  for (int f = 0; f < 6; ++f) {
    const auto it = p.faces.find(names[f]);
    if (it != p.faces.end()) faces[static_cast<std::size_t>(f)] = material_index(s, it->second);
  }
  return make_box_faces({p.min, p.max}, faces, p.type == "room");
}

inline Transform object_transform(const Vec3& position, double rotation_y_degrees) {
  return {Rotation3::about_y(rotation_y_degrees * std::numbers::pi / 180.0), position};
}

}  // namespace config_detail

/// Builds (and commits) the scene at its initial object placement.
inline Scene build_scene(const ConfigDocument& doc) {
  using namespace config_detail;
  Scene scene;
  scene.materials = doc.scene.materials;
  scene.lights = doc.scene.lights;
  scene.environment = doc.scene.environment;
  for (const PrimitiveDesc& p : doc.scene.geometry) {
    const auto tris = primitive_triangles(doc.scene, p, doc.base_dir);
    Aabb group;
    for (const Triangle& t : tris) group.extend(t.bounds());
    scene.static_triangles.insert(scene.static_triangles.end(), tris.begin(), tris.end());
    if (!group.empty()) scene.static_groups.push_back(group);
  }
  for (const ObjectDesc& o : doc.scene.objects) {
    DynamicObject obj;
    obj.name = o.name;
    obj.mesh.name = o.name;
    for (const PrimitiveDesc& p : o.geometry) {
      const auto tris = primitive_triangles(doc.scene, p, doc.base_dir);
      obj.mesh.triangles.insert(obj.mesh.triangles.end(), tris.begin(), tris.end());
    }
    obj.transform = object_transform(o.position, o.rotation_y_degrees);
    scene.objects.push_back(std::move(obj));
  }
  scene.commit();
  return scene;
}

/// Applies this frame's object transforms and light changes to `scene` (then commits it) and
/// returns the events raised on this frame.
inline std::vector<SceneEvent> apply_frame(Scene& scene, const FrameScript& script, int frame) {
  bool moved = false;
  for (const ObjectTrack& t : script.object_tracks) {
    const int idx = scene.find_object(t.object);
    if (idx < 0) throw std::invalid_argument("apply_frame: unknown object '" + t.object + "'");
    const Transform tr = interpolate_keys(t.keys, frame, [](const ObjectKey& a, const ObjectKey& b, double s) {
      return config_detail::object_transform(lerp(a.position, b.position, s),
                                             a.rotation_y_degrees + (b.rotation_y_degrees - a.rotation_y_degrees) * s);
    });
    DynamicObject& obj = scene.objects[static_cast<std::size_t>(idx)];
    if (!(obj.transform.translation == tr.translation) || !(obj.transform.rotation.rows == tr.rotation.rows)) {
      obj.transform = tr;
      moved = true;
    }
  }
  std::vector<SceneEvent> raised;
  for (const EventDesc& e : script.events) {
    if (e.frame != frame) continue;
    raised.push_back(e.type);
    for (const LightChange& c : e.lights) {
      const int idx = scene.find_light(c.light);
      if (idx < 0) throw std::invalid_argument("apply_frame: unknown light '" + c.light + "'");
      Light& l = scene.lights[static_cast<std::size_t>(idx)];
      if (c.enabled) l.enabled = *c.enabled;
      if (c.intensity) l.intensity = *c.intensity;
      if (c.position) l.position = *c.position;
      if (c.direction) l.direction = *c.direction;
    }
  }
  if (moved) scene.commit();
  return raised;
}

}  // namespace ddgi
