// Command-line renderer: replays a config's frame script and writes images, stats and dumps.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ddgi/ddgi.hpp"
#include "png_writer.hpp"

namespace fs = std::filesystem;

namespace {

struct RenderArgs {
  std::string config;
  std::optional<int> frames;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool dump_atlas = false;
  bool dump_states = false;
  bool no_png = false;
  std::string compare_oracle;
  std::vector<std::string> disable;
};

void disable_feature(ddgi::FeatureToggles& f, const std::string& name) {
  if (name == "sleeping") f.sleeping = false;
  else if (name == "optimizer") f.optimizer = false;
  else if (name == "heuristics") f.heuristics = false;
  else if (name == "second_order_glossy" || name == "glossy") f.second_order_glossy = false;
  else if (name == "camera_aware_blending") f.camera_aware_blending = false;
  else
    throw CLI::ValidationError("--disable", "unknown feature '" + name +
                                                "' (sleeping, optimizer, heuristics, second_order_glossy, "
                                                "camera_aware_blending)");
}

int parse_every(const std::string& s) {
  const std::string v = s.rfind("every=", 0) == 0 ? s.substr(6) : s;
  std::size_t used = 0;
  int k = 0;
  try {
    k = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || k < 1) throw CLI::ValidationError("--compare-oracle", "expected every=K with K >= 1");
  return k;
}

std::string precise(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

std::string frame_name(const std::string& prefix, int frame, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d", frame);
  return prefix + buf + ext;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

bool image_valid(const ddgi::FrameImage& img) {
  for (float v : img.rgb)
    if (!std::isfinite(v) || v < 0.f) return false;
  return true;
}

bool offsets_valid(const ddgi::ProbeVolume& v) {
  const ddgi::Vec3 lim = v.offset_limit();
  for (int i = 0; i < v.probe_count(); ++i) {
    const ddgi::Vec3& o = v.record(v.logical_from_linear(i)).offset;
    for (int a = 0; a < 3; ++a)
      if (std::abs(o[a]) > lim[a] * (1.0 + 1e-9)) return false;
  }
  return true;
}

int run_render(const RenderArgs& args) {
  ddgi::ConfigDocument doc = ddgi::load_config(args.config);
  if (args.frames) doc.script.frames = *args.frames;
  if (args.seed) doc.run.renderer.seed = *args.seed;
  if (args.threads) doc.run.renderer.threads = *args.threads;
  if (args.out) doc.run.output.dir = *args.out;
  if (args.dump_atlas) doc.run.output.dump_atlas = true;
  if (args.dump_states) doc.run.output.dump_states = true;
  if (args.no_png) doc.run.output.png = false;
  if (!args.compare_oracle.empty()) doc.run.output.compare_oracle_every = parse_every(args.compare_oracle);
  for (const auto& f : args.disable) disable_feature(doc.run.renderer.features, f);
  if (doc.script.frames < 1) throw std::invalid_argument("--frames must be >= 1");

  const fs::path out_dir(doc.run.output.dir);
  fs::create_directories(out_dir);
  ddgi::Scene scene = ddgi::build_scene(doc);
  ddgi::DdgiRenderer renderer(doc.run.volumes, doc.run.renderer);
  const auto& rs = doc.run.renderer;
  const int oracle_every = doc.run.output.compare_oracle_every;

  std::ofstream csv(out_dir / "stats.csv");
  if (!csv) throw std::runtime_error("cannot write " + (out_dir / "stats.csv").string());
  csv << "frame,rays_traced,update_rays,burst_rays,optimizer_rays";
  for (auto s : ddgi::kAllProbeStates) csv << ',' << ddgi::to_string(s);
  csv << ",respawned,wake_transitions,flagged_pixels,significant_changes,new_distributions,negative_clamps,"
         "variance_clamps,irradiance_alpha,visibility_alpha,events,rms_vs_previous,rms_vs_oracle,wall_ms\n";
  csv.precision(9);

  bool breach = false;
  std::optional<ddgi::FrameImage> previous;
  for (int f = 0; f < doc.script.frames; ++f) {
    const auto start = std::chrono::steady_clock::now();
    for (ddgi::SceneEvent e : ddgi::apply_frame(scene, doc.script, f)) renderer.raise_event(e);
    const ddgi::Camera camera = doc.script.camera_at(f);
    ddgi::FrameStats st;
    const ddgi::FrameImage img = renderer.render_frame(scene, camera, st);

    if (doc.run.output.pfm) ddgi::write_pfm((out_dir / frame_name("frame_", f, ".pfm")).string(), img);
    if (doc.run.output.png) ddgi_tool::write_png((out_dir / frame_name("frame_", f, ".png")).string(), img);

    std::string rms_prev, rms_oracle;
    if (previous) rms_prev = precise(ddgi::rms_difference(img, *previous));
    if (oracle_every > 0 && f % oracle_every == 0) {
      const ddgi::FrameImage oracle =
          ddgi::reference_path_trace(scene, camera, rs.width, rs.height, doc.run.output.oracle_spp,
                                     ddgi::hash_combine(rs.seed, static_cast<std::uint64_t>(f)), rs.threads);
      rms_oracle = precise(ddgi::rms_difference(img, oracle));
      ddgi::write_pfm((out_dir / frame_name("oracle_", f, ".pfm")).string(), oracle);
    }
    if (doc.run.output.dump_atlas)
      for (const auto& v : renderer.volumes()) {
        const std::string prefix = "atlas_" + v.desc().name + "_";
        ddgi::write_pfm((out_dir / frame_name(prefix + "irradiance_", f, ".pfm")).string(),
                        ddgi::atlas_image(v.irradiance()));
        ddgi::write_pfm((out_dir / frame_name(prefix + "visibility_", f, ".pfm")).string(),
                        ddgi::atlas_image(v.visibility()));
      }
    if (doc.run.output.dump_states)
      for (const auto& v : renderer.volumes())
        write_text(out_dir / frame_name("states_" + v.desc().name + "_", f, ".csv"), ddgi::probe_state_csv(v));

    bool frame_ok = image_valid(img);
    for (const auto& v : renderer.volumes()) frame_ok = frame_ok && offsets_valid(v);
    if (!frame_ok) {
      breach = true;
      std::cerr << "frame " << f << ": invariant breach (non-finite/negative pixel or probe offset past its limit)\n";
    }

    std::string events;
    for (const auto& e : st.events) events += (events.empty() ? "" : ";") + e;
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    csv << f << ',' << st.rays_traced << ',' << st.update_rays << ',' << st.burst_rays << ',' << st.optimizer_rays;
    for (auto c : st.state_counts) csv << ',' << c;
    csv << ',' << st.respawned << ',' << st.wake_transitions << ',' << st.flagged_pixels << ','
        << st.update.significant_changes << ',' << st.update.new_distributions << ',' << st.update.negative_clamps
        << ',' << st.update.variance_clamps << ',' << st.irradiance_alpha << ',' << st.visibility_alpha << ','
        << events << ',' << rms_prev << ',' << rms_oracle << ',' << ms << '\n';
    previous = img;
  }
  return breach ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probe-based dynamic diffuse global illumination renderer"};
  app.require_subcommand(1);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Replay a config's frame script");
  render->add_option("config", ra.config, "JSON config file")->required()->check(CLI::ExistingFile);
  render->add_option("--frames", ra.frames, "Number of frames (overrides the script)");
  render->add_option("--seed", ra.seed, "Run seed");
  render->add_option("--out", ra.out, "Output directory");
  render->add_option("--threads", ra.threads, "Worker threads (0 = all cores)");
  render->add_flag("--dump-atlas", ra.dump_atlas, "Write probe atlases every frame");
  render->add_flag("--dump-states", ra.dump_states, "Write probe states every frame");
  render->add_flag("--no-png", ra.no_png, "Skip PNG output");
  render->add_option("--compare-oracle", ra.compare_oracle, "Path-trace every K-th frame: every=K");
  render->add_option("--disable", ra.disable, "Features to disable")->delimiter(',');

  std::string preset_name, preset_out;
  auto* preset = app.add_subcommand("preset", "Write a built-in scene as a config file");
  preset->add_option("name", preset_name, "Preset name")->required()->check(CLI::IsMember(ddgi::presets::names()));
  preset->add_option("-o,--out", preset_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*render) return run_render(ra);
    const std::string text = ddgi::serialize_config(ddgi::presets::by_name(preset_name)).dump(2) + "\n";
    if (preset_out.empty()) std::cout << text;
    else write_text(preset_out, text);
    return 0;
  } catch (const ddgi::ConfigError& e) {
    std::cerr << "config error at " << e.what() << '\n';
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
