#pragma once

// Minimal Wavefront OBJ reader: `v` and `f` records (polygons fan-triangulated,
// negative indices allowed). Normals and texture coordinates are ignored; shading
// uses the geometric normal of each triangle's winding.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddgi/scene.hpp"

namespace ddgi {

inline std::vector<Triangle> parse_obj(std::istream& in, int material, const std::string& source = "<obj>") {
  std::vector<Vec3> positions;
  std::vector<Triangle> tris;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) throw std::runtime_error(source + ":" + std::to_string(line_no) + ": bad vertex");
      positions.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const int i = std::stoi(tok.substr(0, tok.find('/')));
        const int resolved = i < 0 ? static_cast<int>(positions.size()) + i : i - 1;
        if (i == 0 || resolved < 0 || resolved >= static_cast<int>(positions.size()))
          throw std::runtime_error(source + ":" + std::to_string(line_no) + ": vertex index out of range");
        idx.push_back(resolved);
      }
      if (idx.size() < 3) throw std::runtime_error(source + ":" + std::to_string(line_no) + ": face needs 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        Triangle t;
        t.v0 = positions[static_cast<std::size_t>(idx[0])];
        t.v1 = positions[static_cast<std::size_t>(idx[k])];
        t.v2 = positions[static_cast<std::size_t>(idx[k + 1])];
        t.material = material;
        tris.push_back(t);
      }
    }
  }
  return tris;
}

inline std::vector<Triangle> load_obj(const std::string& path, int material) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_obj: cannot open " + path);
  return parse_obj(in, material, path);
}

}  // namespace ddgi
