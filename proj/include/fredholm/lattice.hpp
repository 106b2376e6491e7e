#pragma once

// Staggered finite-difference complexes on doubled coordinates. Every
// component lives on positions of a fixed parity; D_j reads the two
// neighbours at distance one in doubled units, so all difference
// operators commute and compositions vanish exactly on the integers.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "topology.hpp"

namespace fredholm {

struct StencilTerm {
  int comp;
  Int3 shift;
  long long coef;
};

using StencilExpr = std::vector<StencilTerm>;

namespace stencil {

inline StencilExpr combine(const StencilExpr& t) {
  std::map<std::pair<int, Int3>, long long> acc;
  for (const auto& x : t) acc[{x.comp, x.shift}] += x.coef;
  StencilExpr out;
  for (const auto& [k, v] : acc)
    if (v != 0) out.push_back({k.first, k.second, v});
  return out;
}

inline StencilExpr sum(std::initializer_list<StencilExpr> parts) {
  StencilExpr all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return combine(all);
}

inline StencilExpr scale(StencilExpr t, long long a) {
  for (auto& x : t) x.coef *= a;
  return combine(t);
}

inline StencilExpr value(int comp, long long coef = 1) { return {{comp, {0, 0, 0}, coef}}; }

// central difference along direction i of an expression
inline StencilExpr diff(int i, const StencilExpr& t) {
  StencilExpr out;
  for (const auto& x : t) {
    out.push_back({x.comp, x.shift + unit(i), x.coef});
    out.push_back({x.comp, x.shift - unit(i), -x.coef});
  }
  return combine(out);
}

inline StencilExpr diff(int i, int comp, long long coef = 1) { return diff(i, value(comp, coef)); }

}  // namespace stencil

// out_r(P) = sum over terms of coef * in_{comp}(P + shift), divided by denom.
struct Stencil {
  int nin = 0;
  int nout = 0;
  std::vector<StencilExpr> rows;
  long long denom = 1;
};

struct LatticeSpace {
  std::vector<Int3> parity;  // per component
  std::vector<int> comp;     // per unknown
  std::vector<Int3> pos;     // per unknown, doubled coordinates
  std::vector<DoubledGrid> lookup;

  int size() const { return int(comp.size()); }
  int find(int c, const Int3& p) const { return lookup[size_t(c)].get(p); }
};

// Fixed parities make the lattice well defined: every term of an output
// row must land on the parity of the input component it reads.
inline std::vector<std::vector<Int3>> propagate_parities(const std::array<Stencil, 3>& ops,
                                                         const std::vector<Int3>& p0) {
  std::vector<std::vector<Int3>> par{p0};
  for (const auto& op : ops) {
    if (int(par.back().size()) != op.nin) throw InputError("stencil input count mismatch");
    std::vector<Int3> out;
    for (const auto& row : op.rows) {
      if (row.empty()) throw InputError("empty stencil row");
      Int3 p{};
      for (size_t t = 0; t < row.size(); ++t) {
        Int3 q;
        for (size_t d = 0; d < 3; ++d) q[d] = ((par.back()[size_t(row[t].comp)][d] + row[t].shift[d]) % 2 + 2) % 2;
        if (t == 0) p = q;
        else if (q != p) throw InputError("stencil row mixes parities");
      }
      out.push_back(p);
    }
    par.push_back(out);
  }
  return par;
}

// Values attached to lattice positions; comp is the layout slot (or the
// direction of an edge for cubical cochains).
struct GridField {
  std::vector<Int3> pos;
  std::vector<int> comp;
  Vector values;
};

inline GridField grid_field(const LatticeSpace& s, const Vector& v) {
  if (v.size() != s.size()) throw InputError("grid_field: size mismatch");
  return {s.pos, s.comp, v};
}

struct LatticeComplex {
  std::string kind;
  std::array<LatticeSpace, 4> space;
  std::array<Stencil, 3> ops;
  std::array<IntMatrix, 3> A;  // integer numerators, A[k] = denom * operator
};

struct LatticeOptions {
  bool allow_thin = false;
};

namespace detail {

inline LatticeSpace make_space(const std::vector<Int3>& parity, const Int3& box,
                               const std::vector<std::vector<char>>& allowed) {
  LatticeSpace s;
  s.parity = parity;
  const DoubledGrid proto(box);
  const Int3 ext = proto.extent();
  for (size_t c = 0; c < parity.size(); ++c) {
    s.lookup.push_back(proto);
    for (int x = parity[c][0]; x < ext[0]; x += 2)
      for (int y = parity[c][1]; y < ext[1]; y += 2)
        for (int z = parity[c][2]; z < ext[2]; z += 2) {
          const size_t f = (size_t(x) * ext[1] + y) * ext[2] + z;
          if (!allowed[c][f]) continue;
          s.lookup[c].put({x, y, z}, s.size());
          s.comp.push_back(int(c));
          s.pos.push_back({x, y, z});
        }
  }
  return s;
}

}  // namespace detail

// Top space: all positions of the closed domain. Lower spaces: a position is
// kept iff every output it feeds is kept (zero extension).
inline LatticeComplex build_lattice_complex(const VoxelDomain& dom, const std::string& kind,
                                            const std::array<Stencil, 3>& ops, const std::vector<Int3>& p0,
                                            const LatticeOptions& opt = {}) {
  const auto par = propagate_parities(ops, p0);
  const Int3 box = dom.box();
  const DoubledGrid proto(box);
  const Int3 ext = proto.extent();
  const size_t total = size_t(ext[0]) * ext[1] * ext[2];
  auto flat = [&](const Int3& p) { return (size_t(p[0]) * ext[1] + p[1]) * ext[2] + p[2]; };
  auto inside = [&](const Int3& p) { return proto.inside(p); };

  std::array<std::vector<std::vector<char>>, 4> allowed;
  allowed[3].assign(par[3].size(), std::vector<char>(total, 0));
  for (size_t c = 0; c < par[3].size(); ++c)
    for (int x = par[3][c][0]; x < ext[0]; x += 2)
      for (int y = par[3][c][1]; y < ext[1]; y += 2)
        for (int z = par[3][c][2]; z < ext[2]; z += 2)
          if (touches_domain(dom, {x, y, z})) allowed[3][c][flat({x, y, z})] = 1;

  for (int k = 2; k >= 0; --k) {
    const Stencil& op = ops[size_t(k)];
    // reads[c] = (output row, shift) pairs that read input component c
    std::vector<std::vector<std::pair<int, Int3>>> reads(size_t(op.nin));
    for (int r = 0; r < op.nout; ++r)
      for (const auto& t : op.rows[size_t(r)]) reads[size_t(t.comp)].push_back({r, t.shift});
    allowed[size_t(k)].assign(size_t(op.nin), std::vector<char>(total, 0));
    for (int c = 0; c < op.nin; ++c)
      for (int x = par[size_t(k)][size_t(c)][0]; x < ext[0]; x += 2)
        for (int y = par[size_t(k)][size_t(c)][1]; y < ext[1]; y += 2)
          for (int z = par[size_t(k)][size_t(c)][2]; z < ext[2]; z += 2) {
            const Int3 p{x, y, z};
            bool ok = true;
            for (const auto& [r, s] : reads[size_t(c)]) {
              const Int3 q = p - s;
              if (!inside(q) || !allowed[size_t(k + 1)][size_t(r)][flat(q)]) {
                ok = false;
                break;
              }
            }
            if (ok) allowed[size_t(k)][size_t(c)][flat(p)] = 1;
          }
  }

  LatticeComplex lc;
  lc.kind = kind;
  lc.ops = ops;
  for (size_t k = 0; k < 4; ++k) lc.space[k] = detail::make_space(par[k], box, allowed[k]);
  if (!opt.allow_thin && lc.space[0].size() == 0)
    throw DomainTooThin("domain '" + dom.label() + "' has no interior unknowns for the " + kind + " stencils");

  for (size_t k = 0; k < 3; ++k) {
    const LatticeSpace& in = lc.space[k];
    const LatticeSpace& out = lc.space[k + 1];
    std::vector<IntEntry> e;
    for (int i = 0; i < out.size(); ++i) {
      const auto& row = ops[k].rows[size_t(out.comp[size_t(i)])];
      for (const auto& t : row) {
        const int j = in.find(t.comp, out.pos[size_t(i)] + t.shift);
        if (j >= 0) e.push_back({i, j, t.coef});
      }
    }
    lc.A[k] = IntMatrix::from_entries(out.size(), in.size(), std::move(e));
  }
  return lc;
}

}  // namespace fredholm
