#pragma once

// Named coarse shapes and the voxel file format.
//
// File format (text):
//   fredholm-voxels 1
//   box NX NY NZ
//   x y z          one filled voxel per line
// Blank lines and lines starting with '#' are ignored.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "topology.hpp"

namespace fredholm {

struct NamedShape {
  std::string name;
  int n, m, p;  // expected invariants
};

inline const std::vector<NamedShape>& named_shapes() {
  static const std::vector<NamedShape> z = {
      {"box", 1, 1, 0},         {"two-boxes", 2, 1, 0},         {"hollow-box", 1, 2, 0},
      {"solid-torus", 1, 1, 1}, {"torus-with-cavity", 1, 2, 1}, {"genus-2", 1, 1, 2},
  };
  return z;
}

inline const NamedShape& named_shape_info(const std::string& name) {
  for (const auto& s : named_shapes())
    if (s.name == name) return s;
  throw InputError("unknown named domain '" + name + "'");
}

// Coarse shape with a one-voxel margin.
inline VoxelDomain named_domain(const std::string& name) {
  std::vector<Int3> v;
  Int3 size{1, 1, 1};
  auto block = [&](Int3 s, auto keep) {
    size = s;
    for (int x = 0; x < s[0]; ++x)
      for (int y = 0; y < s[1]; ++y)
        for (int z = 0; z < s[2]; ++z)
          if (keep(x, y, z)) v.push_back({x, y, z});
  };
  if (name == "box") {
    block({1, 1, 1}, [](int, int, int) { return true; });
  } else if (name == "two-boxes") {
    block({3, 1, 1}, [](int x, int, int) { return x != 1; });
  } else if (name == "hollow-box") {
    block({3, 3, 3}, [](int x, int y, int z) { return !(x == 1 && y == 1 && z == 1); });
  } else if (name == "solid-torus") {
    block({3, 3, 1}, [](int x, int y, int) { return !(x == 1 && y == 1); });
  } else if (name == "genus-2") {
    block({5, 3, 1}, [](int x, int y, int) { return !(y == 1 && (x == 1 || x == 3)); });
  } else if (name == "torus-with-cavity") {
    block({7, 7, 3}, [](int x, int y, int z) {
      if (x == 3 && y == 3) return false;
      if (x == 1 && y == 3 && z == 1) return false;
      return true;
    });
  } else {
    throw InputError("unknown named domain '" + name + "'");
  }
  for (auto& x : v) x = x + Int3{1, 1, 1};
  return VoxelDomain::from_voxels({size[0] + 2, size[1] + 2, size[2] + 2}, v, name);
}

inline std::string format_domain(const VoxelDomain& d) {
  std::ostringstream os;
  os << "fredholm-voxels 1\n";
  if (!d.label().empty()) os << "# " << d.label() << "\n";
  os << "box " << d.box()[0] << ' ' << d.box()[1] << ' ' << d.box()[2] << "\n";
  for (const auto& v : d.voxels()) os << v[0] << ' ' << v[1] << ' ' << v[2] << "\n";
  return os.str();
}

inline VoxelDomain parse_domain(std::istream& in, const std::string& label = {}) {
  std::string line;
  int lineno = 0;
  bool header = false, have_box = false;
  Int3 box{0, 0, 0};
  std::vector<Int3> vox;
  auto fail = [&](const std::string& msg) -> void {
    throw InputError("line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!header) {
      std::string magic;
      int version = 0;
      if (!(ls >> magic >> version) || magic != "fredholm-voxels") fail("expected header 'fredholm-voxels 1'");
      if (version != 1) fail("unsupported format version " + std::to_string(version));
      header = true;
      continue;
    }
    if (!have_box) {
      std::string kw;
      if (!(ls >> kw >> box[0] >> box[1] >> box[2]) || kw != "box") fail("expected 'box NX NY NZ'");
      for (int b : box)
        if (b <= 0) fail("box dimensions must be positive");
      have_box = true;
      continue;
    }
    Int3 v;
    if (!(ls >> v[0] >> v[1] >> v[2])) fail("expected three integers");
    std::string extra;
    if (ls >> extra) fail("trailing characters");
    if (v[0] < 0 || v[1] < 0 || v[2] < 0 || v[0] >= box[0] || v[1] >= box[1] || v[2] >= box[2])
      fail("voxel outside the box");
    vox.push_back(v);
  }
  if (!header) throw InputError("empty domain file");
  if (!have_box) throw InputError("missing box line");
  VoxelDomain d(box, label);
  for (const auto& v : vox) {
    if (d.has(v)) throw InputError("duplicate voxel " + std::to_string(v[0]) + " " + std::to_string(v[1]) + " " +
                                   std::to_string(v[2]));
    d.set(v, true);
  }
  d.validate();
  return d;
}

inline VoxelDomain load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open domain file " + path);
  return parse_domain(in, path);
}

}  // namespace fredholm
