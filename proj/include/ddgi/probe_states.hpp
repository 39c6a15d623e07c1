#pragma once

// Probe lifecycle. Uninitialized probes (fresh volumes or respawned tracking-window
// planes) are relocated and classified Off, NewlyVigilant or Sleeping; Sleeping
// probes wake as NewlyAwake when a dynamic object's extended bounds cover them;
// Newly* probes converge into Awake/Vigilant.

#include <optional>
#include <vector>

#include "ddgi/parallel.hpp"
#include "ddgi/position_optimizer.hpp"
#include "ddgi/probe_update.hpp"
#include "ddgi/probe_volume.hpp"

namespace ddgi {

enum class ProbeEvent {
  kClassifiedInWall,       // stuck inside static geometry after relocation
  kClassifiedNearSurface,  // static frontface within one probe spacing
  kClassifiedFarFromSurface,
  kInsideDynamicBounds,
  kOutsideDynamicBounds,
  kConverged,
  kRespawned,
};

inline constexpr std::array<ProbeEvent, 7> kAllProbeEvents{
    ProbeEvent::kClassifiedInWall,     ProbeEvent::kClassifiedNearSurface, ProbeEvent::kClassifiedFarFromSurface,
    ProbeEvent::kInsideDynamicBounds,  ProbeEvent::kOutsideDynamicBounds,  ProbeEvent::kConverged,
    ProbeEvent::kRespawned};

/// nullopt stands for "uninitialized".
using LifecycleState = std::optional<ProbeState>;

/// Edges of the state diagram.
inline bool is_lifecycle_edge(const LifecycleState& from, const LifecycleState& to) {
  if (!to) return true;  // any probe may respawn
  if (!from) return *to == ProbeState::kOff || *to == ProbeState::kNewlyVigilant || *to == ProbeState::kSleeping;
  switch (*from) {
    case ProbeState::kSleeping: return *to == ProbeState::kNewlyAwake;
    case ProbeState::kNewlyAwake: return *to == ProbeState::kAwake;
    case ProbeState::kNewlyVigilant: return *to == ProbeState::kVigilant;
    case ProbeState::kAwake: return *to == ProbeState::kSleeping;
    case ProbeState::kOff:
    case ProbeState::kVigilant: return false;
  }
  return false;
}

/// The state machine. Events that do not apply to a state leave it unchanged.
inline LifecycleState transition(const LifecycleState& s, ProbeEvent e) {
  if (e == ProbeEvent::kRespawned) return std::nullopt;
  if (!s) {
    switch (e) {
      case ProbeEvent::kClassifiedInWall: return ProbeState::kOff;
      case ProbeEvent::kClassifiedNearSurface: return ProbeState::kNewlyVigilant;
      case ProbeEvent::kClassifiedFarFromSurface: return ProbeState::kSleeping;
      default: return s;
    }
  }
  switch (e) {
    case ProbeEvent::kInsideDynamicBounds:
      return *s == ProbeState::kSleeping ? LifecycleState{ProbeState::kNewlyAwake} : s;
    case ProbeEvent::kOutsideDynamicBounds:
      return *s == ProbeState::kAwake ? LifecycleState{ProbeState::kSleeping} : s;
    case ProbeEvent::kConverged:
      if (*s == ProbeState::kNewlyAwake) return ProbeState::kAwake;
      if (*s == ProbeState::kNewlyVigilant) return ProbeState::kVigilant;
      return s;
    default:
      return s;
  }
}

inline LifecycleState lifecycle_of(const ProbeRecord& r) {
  return r.initialized ? LifecycleState{r.state} : std::nullopt;
}
inline void set_lifecycle(ProbeRecord& r, const LifecycleState& s) {
  r.initialized = s.has_value();
  if (s) r.state = *s;
}

/// Classification event for a relocated probe. With sleeping disabled every live probe is vigilant.
inline ProbeEvent classify_event(const ProbeRayStats& stats, bool stuck, const Vec3& spacing, bool sleeping_enabled) {
  if (stuck) return ProbeEvent::kClassifiedInWall;
  if (stats.closest_frontface.valid() && stats.closest_frontface.distance < min_component(spacing))
    return ProbeEvent::kClassifiedNearSurface;
  return sleeping_enabled ? ProbeEvent::kClassifiedFarFromSurface : ProbeEvent::kClassifiedNearSurface;
}

inline ProbeState classify_probe(const ProbeRayStats& stats, bool stuck, const Vec3& spacing,
                                 bool sleeping_enabled = true) {
  return *transition(std::nullopt, classify_event(stats, stuck, spacing, sleeping_enabled));
}

inline std::vector<Int3> uninitialized_probes(const ProbeVolume& v) {
  std::vector<Int3> out;
  for (int i = 0; i < v.probe_count(); ++i) {
    const Int3 p = v.logical_from_linear(i);
    if (!v.record(p).initialized) out.push_back(p);
  }
  return out;
}

struct InitializationReport {
  int probes = 0;
  std::int64_t rays_traced = 0;
  int iterations = 0;  // per probe
};

/// Relocates and classifies every uninitialized probe.
inline InitializationReport initialize_probes(ProbeVolume& v, const Scene& scene, const OptimizerOptions& opt,
                                              bool sleeping_enabled) {
  InitializationReport rep;
  const auto probes = uninitialized_probes(v);
  if (probes.empty()) return rep;
  const auto results = run_position_optimization(v, scene, probes, scene.static_groups, opt);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    ProbeRecord& rec = v.record(probes[i]);
    const ProbeEvent e = classify_event(results[i].final_stats, results[i].stuck, v.spacing(), sleeping_enabled);
    set_lifecycle(rec, transition(std::nullopt, e));
    rep.rays_traced += static_cast<std::int64_t>(results[i].iterations + 1) * opt.rays_per_probe;
    rep.iterations = std::max(rep.iterations, results[i].iterations);
  }
  rep.probes = static_cast<int>(probes.size());
  return rep;
}

/// Sleeping probes inside any extended bounds wake; Awake probes outside all of them sleep.
inline int wake_probes(ProbeVolume& v, const std::vector<Aabb>& extended_bounds) {
  int transitions = 0;
  for (int i = 0; i < v.probe_count(); ++i) {
    const Int3 p = v.logical_from_linear(i);
    ProbeRecord& rec = v.record(p);
    if (!rec.initialized) continue;
    const Vec3 pos = v.probe_world_position(p);
    bool inside = false;
    for (const Aabb& b : extended_bounds) inside = inside || b.contains(pos);
    const LifecycleState before = lifecycle_of(rec);
    const LifecycleState after =
        transition(before, inside ? ProbeEvent::kInsideDynamicBounds : ProbeEvent::kOutsideDynamicBounds);
    if (after != before) {
      set_lifecycle(rec, after);
      ++transitions;
    }
  }
  return transitions;
}

enum class ConvergeMode { kBurst, kGradual };

inline bool is_newly(ProbeState s) { return s == ProbeState::kNewlyAwake || s == ProbeState::kNewlyVigilant; }

struct ConvergeOptions {
  ConvergeMode mode = ConvergeMode::kGradual;
  int burst_rays = 1024;
  int threads = 0;
};

/// Converges Newly* probes. Burst traces a large ray set now and overwrites their texels
/// (alpha = 0); gradual schedules alpha = 0 for their first regular blend. Both transition
/// them to Awake/Vigilant. Returns the probes that were burst-converged this frame.
inline std::vector<Int3> converge_new_probes(ProbeVolume& v, const ConvergeOptions& opt, const ShadeContext& ctx,
                                             const Rotation3& rotation, const UpdateParams& params,
                                             UpdateStats& stats) {
  std::vector<Int3> newly;
  for (int i = 0; i < v.probe_count(); ++i) {
    const Int3 p = v.logical_from_linear(i);
    const ProbeRecord& rec = v.record(p);
    if (rec.initialized && is_newly(rec.state)) newly.push_back(p);
  }
  if (newly.empty()) return {};
  if (opt.mode == ConvergeMode::kBurst) {
    std::vector<UpdateRaySet> sets(newly.size());
    std::vector<UpdateStats> per(newly.size());
    parallel_for(static_cast<int>(newly.size()), opt.threads, [&](int b, int e, int) {
      for (int i = b; i < e; ++i)
        sets[static_cast<std::size_t>(i)] =
            trace_probe_rays(v, newly[static_cast<std::size_t>(i)], rotation, opt.burst_rays, ctx, per[static_cast<std::size_t>(i)]);
    });
    for (std::size_t i = 0; i < newly.size(); ++i) {
      blend_probe(v, sets[i], 0.0, 0.0, params, per[i]);
      stats += per[i];
    }
  }
  for (const Int3& p : newly) {
    ProbeRecord& rec = v.record(p);
    if (opt.mode == ConvergeMode::kGradual) rec.zero_hysteresis_frames = 1;
    set_lifecycle(rec, transition(lifecycle_of(rec), ProbeEvent::kConverged));
  }
  return opt.mode == ConvergeMode::kBurst ? newly : std::vector<Int3>{};
}

/// Probes that trace this frame: Awake, Vigilant and Newly*. Off and Sleeping trace nothing.
inline std::vector<Int3> update_eligibility(const ProbeVolume& v) {
  std::vector<Int3> out;
  for (int i = 0; i < v.probe_count(); ++i) {
    const Int3 p = v.logical_from_linear(i);
    const ProbeRecord& rec = v.record(p);
    if (!rec.initialized) continue;
    switch (rec.state) {
      case ProbeState::kAwake:
      case ProbeState::kVigilant:
      case ProbeState::kNewlyAwake:
      case ProbeState::kNewlyVigilant:
        out.push_back(p);
        break;
      default:
        break;
    }
  }
  return out;
}

}  // namespace ddgi
