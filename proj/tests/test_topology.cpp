#include <catch_amalgamated.hpp>

#include <sstream>

#include "fredholm/topology.hpp"
#include "fredholm/zoo.hpp"

using namespace fredholm;

namespace {

VoxelDomain bar(Int3 size) {
  std::vector<Int3> v;
  for (int x = 0; x < size[0]; ++x)
    for (int y = 0; y < size[1]; ++y)
      for (int z = 0; z < size[2]; ++z) v.push_back({x + 1, y + 1, z + 1});
  return VoxelDomain::from_voxels({size[0] + 2, size[1] + 2, size[2] + 2}, v, "bar");
}

// Rank over Q by long-double elimination; small integer matrices only.
int brute_rank(const IntMatrix& a) {
  std::vector<std::vector<long double>> m(size_t(a.rows), std::vector<long double>(size_t(a.cols), 0));
  for (const auto& e : a.entries()) m[size_t(e.row)][size_t(e.col)] = (long double)e.value;
  int r = 0;
  for (int c = 0; c < a.cols && r < a.rows; ++c) {
    int piv = -1;
    for (int i = r; i < a.rows; ++i)
      if (std::abs(m[size_t(i)][size_t(c)]) > 1e-9 && (piv < 0 || std::abs(m[size_t(i)][size_t(c)]) > std::abs(m[size_t(piv)][size_t(c)]))) piv = i;
    if (piv < 0) continue;
    std::swap(m[size_t(piv)], m[size_t(r)]);
    for (int i = 0; i < a.rows; ++i) {
      if (i == r) continue;
      const long double f = m[size_t(i)][size_t(c)] / m[size_t(r)][size_t(c)];
      for (int j = c; j < a.cols; ++j) m[size_t(i)][size_t(j)] -= f * m[size_t(r)][size_t(j)];
    }
    ++r;
  }
  return r;
}

std::array<int, 4> brute_betti(const CubicalComplex& cx) {
  const auto c = cx.counts();
  std::array<int, 3> rk{};
  for (size_t k = 0; k < 3; ++k) rk[k] = brute_rank(cx.boundary[k]);
  return {c[0] - rk[0], c[1] - rk[0] - rk[1], c[2] - rk[1] - rk[2], c[3] - rk[2]};
}

}  // namespace

TEST_CASE("cell counts of small complexes") {
  auto one = build_complex(bar({1, 1, 1}));
  CHECK(one.counts() == std::array<int, 4>{8, 12, 6, 1});
  CHECK(one.euler() == 1);
  auto two = build_complex(bar({2, 1, 1}));
  CHECK(two.counts() == std::array<int, 4>{12, 20, 11, 2});
  CHECK(two.euler() == 1);
  CHECK(build_complex(named_domain("solid-torus")).euler() == 0);
}

TEST_CASE("boundary of a boundary vanishes") {
  for (const auto& s : named_shapes()) {
    const auto cx = build_complex(named_domain(s.name));
    CHECK((cx.boundary[0] * cx.boundary[1]).is_zero());
    CHECK((cx.boundary[1] * cx.boundary[2]).is_zero());
  }
}

TEST_CASE("Betti numbers against a brute-force rank oracle") {
  CHECK(betti_numbers(build_complex(bar({2, 2, 1}))) == std::array<int, 4>{1, 0, 0, 0});
  const auto torus = build_complex(named_domain("solid-torus"));
  CHECK(betti_numbers(torus) == std::array<int, 4>{1, 1, 0, 0});
  CHECK(brute_betti(torus) == betti_numbers(torus));
  const auto hollow = build_complex(named_domain("hollow-box"));
  CHECK(betti_numbers(hollow) == std::array<int, 4>{1, 0, 1, 0});
  CHECK(brute_betti(hollow) == betti_numbers(hollow));
}

TEST_CASE("zoo invariants") {
  for (const auto& s : named_shapes()) {
    const auto t = invariants(named_domain(s.name));
    INFO(s.name);
    CHECK(t.n == s.n);
    CHECK(t.m == s.m);
    CHECK(t.p == s.p);
    CHECK(t.betti[2] == s.m - 1);
    CHECK(t.betti[3] == 0);
  }
}

TEST_CASE("refinement preserves invariants") {
  for (const auto& s : named_shapes()) {
    for (int r : {2, 3}) {
      const auto t = invariants(refine(named_domain(s.name), r));
      INFO(s.name << " r=" << r);
      CHECK(t.n == s.n);
      CHECK(t.m == s.m);
      CHECK(t.p == s.p);
    }
  }
  const auto d = refine(named_domain("box"), 3);
  CHECK(d.count() == 27);
  CHECK(d.box() == Int3{5, 5, 5});
  d.validate();
}

TEST_CASE("handle systems") {
  CHECK(handle_system(build_complex(named_domain("box")), 0).loops.empty());
  for (const char* name : {"solid-torus", "genus-2", "torus-with-cavity"}) {
    const auto dom = named_domain(name);
    const auto cx = build_complex(dom);
    const int p = invariants(dom).p;
    const auto hs = handle_system(cx, p);
    INFO(name);
    REQUIRE(int(hs.loops.size()) == p);
    REQUIRE(int(hs.cocycles.size()) == p);
    std::vector<std::vector<long long>> m(size_t(p), std::vector<long long>(size_t(p), 0));
    for (int l = 0; l < p; ++l) {
      CHECK(is_cocycle(cx, hs.cocycles[size_t(l)]));
      for (int j = 0; j < p; ++j) m[size_t(l)][size_t(j)] = pair_cochain(hs.cocycles[size_t(l)], hs.loop_edges[size_t(j)]);
    }
    CHECK(m == hs.pairing);
    CHECK(std::abs(integer_determinant(m)) == 1);
  }
}

TEST_CASE("domain file round trip") {
  for (const auto& s : named_shapes()) {
    const auto d = named_domain(s.name);
    std::istringstream in(format_domain(d));
    CHECK(parse_domain(in) == d);
  }
}

TEST_CASE("shipped domain files match the named shapes") {
  for (const auto& s : named_shapes()) {
    const auto d = load_domain(std::string(FREDHOLM_DATA_DIR) + "/domains/" + s.name + ".vox");
    INFO(s.name);
    CHECK(d == named_domain(s.name));
    const auto t = invariants(d);
    CHECK(t.n == s.n);
    CHECK(t.m == s.m);
    CHECK(t.p == s.p);
  }
}

TEST_CASE("parse errors carry line numbers") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_domain(in);
  };
  auto message = [&](const std::string& text) {
    try {
      parse(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("nonsense\n").find("line 1") != std::string::npos);
  CHECK(message("fredholm-voxels 1\nbox 3 3 3\n1 1\n").find("line 3") != std::string::npos);
  CHECK(message("fredholm-voxels 1\n# c\nbox 3 3 3\n1 1 1\n5 1 1\n").find("line 5") != std::string::npos);
  CHECK(message("fredholm-voxels 1\nbox 3 3 3\n1 1 1\n1 1 1\n").find("duplicate") != std::string::npos);
  CHECK(message("fredholm-voxels 2\n").find("version") != std::string::npos);
  CHECK(message("fredholm-voxels 1\nbox 3 3 3\n1 1 1 7\n").find("trailing") != std::string::npos);
  CHECK_THROWS_AS(parse(""), InputError);
  // no margin
  CHECK_THROWS_AS(parse("fredholm-voxels 1\nbox 2 2 2\n0 0 0\n"), InputError);
  CHECK_THROWS_AS(named_domain("klein-bottle"), InputError);
  CHECK_THROWS_AS(refine(named_domain("box"), 0), InputError);
}
