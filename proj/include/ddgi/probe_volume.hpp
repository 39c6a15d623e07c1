#pragma once

// Probe grid storage: octahedral texel atlases with one-texel borders, per-probe
// offsets and states, and circular-buffer indexing for camera tracking windows.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ddgi/math.hpp"
#include "ddgi/scene.hpp"

namespace ddgi {

enum class ProbeState : std::uint8_t { kOff, kSleeping, kNewlyAwake, kNewlyVigilant, kAwake, kVigilant };

inline constexpr std::array<ProbeState, 6> kAllProbeStates{ProbeState::kOff,          ProbeState::kSleeping,
                                                           ProbeState::kNewlyAwake,   ProbeState::kNewlyVigilant,
                                                           ProbeState::kAwake,        ProbeState::kVigilant};

inline const char* to_string(ProbeState s) {
  switch (s) {
    case ProbeState::kOff: return "off";
    case ProbeState::kSleeping: return "sleeping";
    case ProbeState::kNewlyAwake: return "newly_awake";
    case ProbeState::kNewlyVigilant: return "newly_vigilant";
    case ProbeState::kAwake: return "awake";
    case ProbeState::kVigilant: return "vigilant";
  }
  return "?";
}

/// Source interior texel for border texel (x, y) of a res x res octahedral tile.
/// Border coordinates are -1 or res on at least one axis. Edges copy the interior
/// row/column mirrored along the edge; corners copy the diagonally opposite corner.
inline std::pair<int, int> border_source(int x, int y, int res) {
  const bool left = x < 0, right = x >= res, top = y < 0, bottom = y >= res;
  if ((left || right) && (top || bottom)) return {left ? res - 1 : 0, top ? res - 1 : 0};
  if (left || right) return {left ? 0 : res - 1, res - 1 - y};
  if (top || bottom) return {res - 1 - x, top ? 0 : res - 1};
  return {x, y};
}

/// Row-major grid of per-probe octahedral tiles; each tile is (res + 2)^2 texels including borders.
template <int Channels>
class OctAtlas {
 public:
  using Texel = std::array<float, Channels>;

  OctAtlas() = default;
  OctAtlas(int res, int probe_count, int tiles_per_row)
      : res_(res), probe_count_(probe_count), tiles_per_row_(std::max(1, tiles_per_row)) {
    if (res < 1 || probe_count < 1) throw std::invalid_argument("OctAtlas: bad dimensions");
    tile_rows_ = (probe_count_ + tiles_per_row_ - 1) / tiles_per_row_;
    data_.assign(static_cast<std::size_t>(width()) * height(), Texel{});
  }

  int resolution() const { return res_; }
  int tile_size() const { return res_ + 2; }
  int probe_count() const { return probe_count_; }
  int width() const { return tiles_per_row_ * tile_size(); }
  int height() const { return tile_rows_ * tile_size(); }

  /// Tile-local access with border-inclusive coordinates x, y in [-1, res].
  Texel& at(int probe, int x, int y) { return data_[offset(probe, x, y)]; }
  const Texel& at(int probe, int x, int y) const { return data_[offset(probe, x, y)]; }

  /// Atlas-global texel access (for dumps).
  const Texel& texel(int ax, int ay) const { return data_[static_cast<std::size_t>(ay) * width() + ax]; }

  void fill_tile(int probe, const Texel& value) {
    for (int y = -1; y <= res_; ++y)
      for (int x = -1; x <= res_; ++x) at(probe, x, y) = value;
  }

  void write_borders(int probe) {
    for (int y = -1; y <= res_; ++y) {
      for (int x = -1; x <= res_; ++x) {
        if (x >= 0 && x < res_ && y >= 0 && y < res_) continue;
        const auto [sx, sy] = border_source(x, y, res_);
        at(probe, x, y) = at(probe, sx, sy);
      }
    }
  }

  /// Bilinear fetch on the bordered tile, matching hardware filtering with texel centers at half-integers.
  Texel sample_bilinear(int probe, const OctUV& uv) const {
    const double px = uv.u * res_ - 0.5, py = uv.v * res_ - 0.5;
    const int x0 = std::clamp(static_cast<int>(std::floor(px)), -1, res_ - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(py)), -1, res_ - 1);
    const double fx = std::clamp(px - x0, 0.0, 1.0), fy = std::clamp(py - y0, 0.0, 1.0);
    const Texel& a = at(probe, x0, y0);
    const Texel& b = at(probe, x0 + 1, y0);
    const Texel& c = at(probe, x0, y0 + 1);
    const Texel& d = at(probe, x0 + 1, y0 + 1);
    Texel out{};
    for (int ch = 0; ch < Channels; ++ch) {
      const double top = a[ch] * (1.0 - fx) + b[ch] * fx;
      const double bot = c[ch] * (1.0 - fx) + d[ch] * fx;
      out[ch] = static_cast<float>(top * (1.0 - fy) + bot * fy);
    }
    return out;
  }

  friend bool operator==(const OctAtlas&, const OctAtlas&) = default;

 private:
  std::size_t offset(int probe, int x, int y) const {
    const int tx = (probe % tiles_per_row_) * tile_size() + x + 1;
    const int ty = (probe / tiles_per_row_) * tile_size() + y + 1;
    return static_cast<std::size_t>(ty) * width() + tx;
  }

  int res_ = 0;
  int probe_count_ = 0;
  int tiles_per_row_ = 1;
  int tile_rows_ = 0;
  std::vector<Texel> data_;
};

using IrradianceAtlas = OctAtlas<3>;  // perceptually encoded RGB
using VisibilityAtlas = OctAtlas<2>;  // mean distance, mean squared distance

inline constexpr int kIrradianceResolution = 8;
inline constexpr int kVisibilityResolution = 16;
inline constexpr double kDefaultOffsetLimit = 0.45;

struct VolumeDesc {
  std::string name = "volume";
  Int3 counts{4, 4, 4};
  Vec3 spacing{1, 1, 1};
  Vec3 origin{0, 0, 0};
  bool camera_tracking = false;
  double offset_limit = kDefaultOffsetLimit;
  friend bool operator==(const VolumeDesc&, const VolumeDesc&) = default;
};

struct ProbeRecord {
  Vec3 offset;
  ProbeState state = ProbeState::kOff;
  bool initialized = false;  // false until classified by the initialization pass
  bool stuck = false;
  int zero_hysteresis_frames = 0;  // per-probe override: blend with alpha = 0 while > 0
};

class ProbeVolume {
 public:
  ProbeVolume() = default;
  explicit ProbeVolume(VolumeDesc desc, int id = 0) : desc_(std::move(desc)), id_(id) {
    const Int3& n = desc_.counts;
    if (n.x < 2 || n.y < 2 || n.z < 2) throw std::invalid_argument("ProbeVolume: need at least 2 probes per axis");
    if (!(desc_.spacing.x > 0 && desc_.spacing.y > 0 && desc_.spacing.z > 0))
      throw std::invalid_argument("ProbeVolume: spacing must be positive");
    if (!(desc_.offset_limit >= 0.0 && desc_.offset_limit < 0.5))
      throw std::invalid_argument("ProbeVolume: offset_limit must be in [0, 0.5)");
    const int count = n.x * n.y * n.z;
    probes_.assign(static_cast<std::size_t>(count), ProbeRecord{});
    irradiance_ = IrradianceAtlas(kIrradianceResolution, count, n.x);
    visibility_ = VisibilityAtlas(kVisibilityResolution, count, n.x);
    for (int p = 0; p < count; ++p) reset_tile(p);
  }

  const VolumeDesc& desc() const { return desc_; }
  int id() const { return id_; }
  const Int3& counts() const { return desc_.counts; }
  const Vec3& spacing() const { return desc_.spacing; }
  const Vec3& origin() const { return desc_.origin; }
  const Int3& phase_offset() const { return phase_; }
  bool camera_tracking() const { return desc_.camera_tracking; }
  int probe_count() const { return static_cast<int>(probes_.size()); }
  double min_spacing() const { return min_component(desc_.spacing); }
  Vec3 offset_limit() const { return desc_.spacing * desc_.offset_limit; }
  /// Stored distances never exceed 1.5x the cell diagonal.
  double distance_clamp() const { return 1.5 * length(desc_.spacing); }

  Aabb bounds() const {
    Aabb b;
    b.lo = desc_.origin;
    b.hi = desc_.origin + desc_.spacing * Vec3(desc_.counts.x - 1, desc_.counts.y - 1, desc_.counts.z - 1);
    return b;
  }
  Vec3 window_center() const { return bounds().center(); }

  bool in_range(const Int3& logical) const {
    for (int a = 0; a < 3; ++a)
      if (logical[a] < 0 || logical[a] >= desc_.counts[a]) return false;
    return true;
  }

  /// Circular-buffer mapping from logical grid index to storage index.
  Int3 storage_index(const Int3& logical) const {
    Int3 s;
    for (int a = 0; a < 3; ++a) {
      const int n = desc_.counts[a];
      s[a] = ((logical[a] + phase_[a]) % n + n) % n;
    }
    return s;
  }
  int storage_linear(const Int3& logical) const {
    check(logical);
    const Int3 s = storage_index(logical);
    return s.x + desc_.counts.x * (s.y + desc_.counts.y * s.z);
  }
  Int3 logical_from_linear(int linear_logical) const {
    const Int3& n = desc_.counts;
    return {linear_logical % n.x, (linear_logical / n.x) % n.y, linear_logical / (n.x * n.y)};
  }

  Vec3 probe_grid_position(const Int3& logical) const {
    check(logical);
    return desc_.origin + desc_.spacing * Vec3(logical.x, logical.y, logical.z);
  }
  Vec3 probe_world_position(const Int3& logical) const {
    return probe_grid_position(logical) + record(logical).offset;
  }

  const ProbeRecord& record(const Int3& logical) const { return probes_[storage_linear(logical)]; }
  ProbeRecord& record(const Int3& logical) { return probes_[storage_linear(logical)]; }
  ProbeState state(const Int3& logical) const { return record(logical).state; }
  void set_state(const Int3& logical, ProbeState s) { record(logical).state = s; }

  /// Rejects offsets beyond offset_limit * spacing on any axis.
  void set_offset(const Int3& logical, const Vec3& offset) {
    const Vec3 lim = offset_limit();
    for (int a = 0; a < 3; ++a)
      if (std::abs(offset[a]) > lim[a] * (1.0 + 1e-12)) throw std::out_of_range("ProbeVolume: probe offset exceeds limit");
    record(logical).offset = offset;
  }

  IrradianceAtlas& irradiance() { return irradiance_; }
  const IrradianceAtlas& irradiance() const { return irradiance_; }
  VisibilityAtlas& visibility() { return visibility_; }
  const VisibilityAtlas& visibility() const { return visibility_; }

  /// Clears a probe's texels to the uninitialized value (zero irradiance, distance at the clamp bound).
  void reset_tile(int storage) {
    irradiance_.fill_tile(storage, {0.f, 0.f, 0.f});
    const float d = static_cast<float>(distance_clamp());
    visibility_.fill_tile(storage, {d, d * d});
  }

  /// Moves the window one probe plane at a time until the camera is within one probe
  /// spacing of its center on every axis. Returns the logical indices of respawned probes.
  std::vector<Int3> update_tracking_window(const Vec3& camera) {
    if (!desc_.camera_tracking) throw std::logic_error("update_tracking_window: volume is not camera tracking");
    std::vector<bool> fresh(probes_.size(), false);
    for (int axis = 0; axis < 3; ++axis) {
      const int n = desc_.counts[axis];
      const double s = desc_.spacing[axis];
      for (int guard = 0; guard < 1 << 20; ++guard) {
        const double delta = camera[axis] - window_center()[axis];
        int dir = 0;
        if (delta > s) dir = 1;
        else if (delta < -s) dir = -1;
        if (dir == 0) break;
        desc_.origin[axis] += dir * s;
        phase_[axis] = ((phase_[axis] + dir) % n + n) % n;
        const int plane = dir > 0 ? n - 1 : 0;
        Int3 idx;
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        for (int i = 0; i < desc_.counts[a1]; ++i) {
          for (int j = 0; j < desc_.counts[a2]; ++j) {
            idx[axis] = plane;
            idx[a1] = i;
            idx[a2] = j;
            respawn(idx);
            fresh[static_cast<std::size_t>(storage_linear(idx))] = true;
          }
        }
      }
    }
    // Later shifts move earlier respawns, so report final logical indices.
    std::vector<Int3> respawned;
    for (int i = 0; i < probe_count(); ++i) {
      const Int3 p = logical_from_linear(i);
      if (fresh[static_cast<std::size_t>(storage_linear(p))]) respawned.push_back(p);
    }
    return respawned;
  }

  friend bool operator==(const ProbeVolume& a, const ProbeVolume& b) {
    if (a.probes_.size() != b.probes_.size()) return false;
    for (std::size_t i = 0; i < a.probes_.size(); ++i) {
      const auto &p = a.probes_[i], &q = b.probes_[i];
      if (!(p.offset == q.offset) || p.state != q.state || p.initialized != q.initialized) return false;
    }
    return a.irradiance_ == b.irradiance_ && a.visibility_ == b.visibility_ && a.phase_ == b.phase_;
  }

 private:
  void check(const Int3& logical) const {
    if (!in_range(logical)) throw std::out_of_range("ProbeVolume: probe index out of range");
  }
  void respawn(const Int3& logical) {
    const int s = storage_linear(logical);
    probes_[s] = ProbeRecord{};
    reset_tile(s);
  }

  VolumeDesc desc_;
  int id_ = 0;
  Int3 phase_{0, 0, 0};
  std::vector<ProbeRecord> probes_;
  IrradianceAtlas irradiance_;
  VisibilityAtlas visibility_;
};

}  // namespace ddgi
