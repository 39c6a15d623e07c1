#pragma once

// PFM images and debug dumps (probe atlases, probe states).

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ddgi/probe_volume.hpp"
#include "ddgi/renderer.hpp"

namespace ddgi {

static_assert(std::endian::native == std::endian::little, "PFM output assumes a little-endian host");

/// Portable float map: "PF", dimensions, scale -1 (little endian), rows bottom to top.
inline void write_pfm(const std::string& path, const FrameImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pfm: cannot open " + path);
  out << "PF\n" << img.width << ' ' << img.height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(img.width) * 3;
  for (int y = img.height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(img.rgb.data() + row * y), static_cast<std::streamsize>(row * sizeof(float)));
  if (!out) throw std::runtime_error("write_pfm: write failed for " + path);
}

inline FrameImage read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pfm: cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  in >> magic >> w >> h >> scale;
  in.get();
  if (magic != "PF" || w < 1 || h < 1 || scale >= 0) throw std::runtime_error("read_pfm: unsupported header in " + path);
  FrameImage img(w, h);
  const std::size_t row = static_cast<std::size_t>(w) * 3;
  for (int y = h - 1; y >= 0; --y)
    in.read(reinterpret_cast<char*>(img.rgb.data() + row * y), static_cast<std::streamsize>(row * sizeof(float)));
  if (!in) throw std::runtime_error("read_pfm: truncated " + path);
  return img;
}

/// Whole atlas as an image, borders included. Visibility fills the blue channel with zero.
template <int Channels>
FrameImage atlas_image(const OctAtlas<Channels>& atlas) {
  FrameImage img(atlas.width(), atlas.height());
  for (int y = 0; y < atlas.height(); ++y)
    for (int x = 0; x < atlas.width(); ++x) {
      const auto& t = atlas.texel(x, y);
      Rgb c;
      for (int ch = 0; ch < Channels && ch < 3; ++ch) c[ch] = t[static_cast<std::size_t>(ch)];
      img.set(x, y, c);
    }
  return img;
}

/// One line per probe: logical index, world position, offset, state.
inline std::string probe_state_csv(const ProbeVolume& v) {
  std::ostringstream out;
  out.precision(9);
  out << "volume,i,j,k,x,y,z,offset_x,offset_y,offset_z,state,initialized,stuck\n";
  for (int n = 0; n < v.probe_count(); ++n) {
    const Int3 p = v.logical_from_linear(n);
    const ProbeRecord& r = v.record(p);
    const Vec3 pos = v.probe_world_position(p);
    out << v.desc().name << ',' << p.x << ',' << p.y << ',' << p.z << ',' << pos.x << ',' << pos.y << ',' << pos.z
        << ',' << r.offset.x << ',' << r.offset.y << ',' << r.offset.z << ','
        << (r.initialized ? to_string(r.state) : "uninitialized") << ',' << r.initialized << ',' << r.stuck << '\n';
  }
  return out.str();
}

}  // namespace ddgi
