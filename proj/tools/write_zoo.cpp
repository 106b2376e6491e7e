// Writes data/domains/<name>.vox for every named shape.
#include <fstream>
#include <iostream>

#include "fredholm/topology.hpp"
#include "fredholm/zoo.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data/domains";
  for (const auto& s : fredholm::named_shapes()) {
    const auto d = fredholm::named_domain(s.name);
    const auto t = fredholm::invariants(d);
    if (t.n != s.n || t.m != s.m || t.p != s.p) {
      std::cerr << s.name << ": invariants differ from the documented values\n";
      return 1;
    }
    std::ofstream out(dir + "/" + s.name + ".vox");
    out << "# (n, m, p) = (" << t.n << ", " << t.m << ", " << t.p << ")\n" << fredholm::format_domain(d);
  }
  return 0;
}
