#pragma once

// The de Rham, first/second biharmonic and elasticity complexes on the
// staggered lattice.
//
// Layouts: S = (S11, S22, S33, S12, S13, S23), T = (T11, T22, T12, T13, T21,
// T23, T31, T32) with T33 = -T11 - T22, vectors (v1, v2, v3), scalars (u).

#include <array>
#include <random>
#include <string>
#include <vector>

#include "complex.hpp"
#include "lattice.hpp"
#include "topology.hpp"

namespace fredholm {

enum class ComplexKind { derham, bih1, bih2, ela };

inline std::string to_string(ComplexKind k) {
  switch (k) {
    case ComplexKind::derham: return "derham";
    case ComplexKind::bih1: return "bih1";
    case ComplexKind::bih2: return "bih2";
    case ComplexKind::ela: return "ela";
  }
  return "?";
}

inline ComplexKind parse_kind(const std::string& s) {
  if (s == "derham") return ComplexKind::derham;
  if (s == "bih1") return ComplexKind::bih1;
  if (s == "bih2") return ComplexKind::bih2;
  if (s == "ela") return ComplexKind::ela;
  throw InputError("unknown complex kind '" + s + "'");
}

// multiplicity k of the cohomology targets k(m-1), kp
inline int kind_multiplicity(ComplexKind k) {
  switch (k) {
    case ComplexKind::derham: return 1;
    case ComplexKind::bih1:
    case ComplexKind::bih2: return 4;
    case ComplexKind::ela: return 6;
  }
  return 0;
}

enum class Layout { scalar, vector, sym, dev };

inline std::array<Layout, 4> kind_layouts(ComplexKind k) {
  switch (k) {
    case ComplexKind::derham: return {Layout::scalar, Layout::vector, Layout::vector, Layout::scalar};
    case ComplexKind::bih1: return {Layout::scalar, Layout::sym, Layout::dev, Layout::vector};
    case ComplexKind::bih2: return {Layout::vector, Layout::dev, Layout::sym, Layout::scalar};
    case ComplexKind::ela: return {Layout::vector, Layout::sym, Layout::sym, Layout::vector};
  }
  return {};
}

namespace layout {

inline int sym_index(int i, int j) {
  static const int t[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
  return t[i][j];
}

inline const std::array<std::pair<int, int>, 8>& dev_entries() {
  static const std::array<std::pair<int, int>, 8> t = {
      {{0, 0}, {1, 1}, {0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};
  return t;
}

// components and coefficients of T_ij in the 8-slot layout
inline std::vector<std::pair<int, long long>> dev_slots(int i, int j) {
  if (i == 2 && j == 2) return {{0, -1}, {1, -1}};
  const auto& e = dev_entries();
  for (int s = 0; s < 8; ++s)
    if (e[size_t(s)].first == i && e[size_t(s)].second == j) return {{s, 1}};
  return {};
}

inline std::vector<std::pair<int, long long>> sym_slots(int i, int j) { return {{sym_index(i, j), 1}}; }

inline int levi_civita(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

}  // namespace layout

namespace detail {

using Slots = std::vector<std::pair<int, long long>> (*)(int, int);

// (Curl F)_ij = eps_jkl d_k F_il applied to a tensor field given by slots
inline StencilExpr curl_row(Slots f, int i, int j) {
  StencilExpr t;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      const int e = layout::levi_civita(j, k, l);
      if (!e) continue;
      for (auto [c, cf] : f(i, l)) {
        auto d = stencil::diff(k, c, cf * e);
        t.insert(t.end(), d.begin(), d.end());
      }
    }
  return stencil::combine(t);
}

}  // namespace detail

struct KindStencils {
  std::array<Stencil, 3> ops;
  std::vector<Int3> p0;
};

inline KindStencils kind_stencils(ComplexKind kind) {
  using namespace stencil;
  KindStencils ks;
  auto& A = ks.ops;
  switch (kind) {
    case ComplexKind::derham: {
      A[0] = {1, 3, {diff(0, 0), diff(1, 0), diff(2, 0)}, 1};
      A[1] = {3, 3,
              {sum({diff(1, 2), diff(2, 1, -1)}), sum({diff(2, 0), diff(0, 2, -1)}), sum({diff(0, 1), diff(1, 0, -1)})},
              1};
      A[2] = {3, 1, {sum({diff(0, 0), diff(1, 1), diff(2, 2)})}, 1};
      ks.p0 = {{0, 0, 0}};
      break;
    }
    case ComplexKind::bih1: {
      // Gradgrad, Curl on S, Div on T
      A[0] = {1, 6, std::vector<StencilExpr>(6), 1};
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) A[0].rows[size_t(layout::sym_index(i, j))] = diff(i, diff(j, 0));
      A[1] = {6, 8, {}, 1};
      for (auto [i, j] : layout::dev_entries()) A[1].rows.push_back(detail::curl_row(layout::sym_slots, i, j));
      A[2] = {8, 3, {}, 1};
      for (int i = 0; i < 3; ++i) {
        StencilExpr t;
        for (int j = 0; j < 3; ++j)
          for (auto [c, cf] : layout::dev_slots(i, j)) {
            auto d = diff(j, c, cf);
            t.insert(t.end(), d.begin(), d.end());
          }
        A[2].rows.push_back(combine(t));
      }
      ks.p0 = {{0, 0, 0}};
      break;
    }
    case ComplexKind::bih2: {
      // devGrad (times 3), symCurl on T (times 2), divDiv on S
      A[0] = {3, 8, {}, 3};
      for (auto [i, j] : layout::dev_entries()) {
        StencilExpr t = diff(j, i, 3);
        if (i == j) t = sum({t, diff(0, 0, -1), diff(1, 1, -1), diff(2, 2, -1)});
        A[0].rows.push_back(t);
      }
      A[1] = {8, 6, std::vector<StencilExpr>(6), 2};
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
          A[1].rows[size_t(layout::sym_index(i, j))] =
              sum({detail::curl_row(layout::dev_slots, i, j), detail::curl_row(layout::dev_slots, j, i)});
      StencilExpr t;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          auto d = diff(i, diff(j, layout::sym_index(i, j)));
          t.insert(t.end(), d.begin(), d.end());
        }
      A[2] = {6, 1, {combine(t)}, 1};
      ks.p0 = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      break;
    }
    case ComplexKind::ela: {
      // symGrad (times 2), Curl Curl^T on S, Div on S
      A[0] = {3, 6, std::vector<StencilExpr>(6), 2};
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) A[0].rows[size_t(layout::sym_index(i, j))] = sum({diff(j, i), diff(i, j)});
      A[1] = {6, 6, std::vector<StencilExpr>(6), 1};
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          StencilExpr t;
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
              const int e = layout::levi_civita(j, k, l);
              if (!e) continue;
              auto d = scale(diff(k, detail::curl_row(layout::sym_slots, l, i)), e);
              t.insert(t.end(), d.begin(), d.end());
            }
          A[1].rows[size_t(layout::sym_index(i, j))] = combine(t);
        }
      A[2] = {6, 3, {}, 1};
      for (int i = 0; i < 3; ++i) {
        StencilExpr t;
        for (int j = 0; j < 3; ++j) {
          auto d = diff(j, layout::sym_index(i, j));
          t.insert(t.end(), d.begin(), d.end());
        }
        A[2].rows.push_back(combine(t));
      }
      ks.p0 = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      break;
    }
  }
  return ks;
}

// Frobenius metric of the layout restricted to the unknowns present.
inline IntMatrix layout_metric(const LatticeSpace& s, Layout l) {
  std::vector<IntEntry> e;
  for (int i = 0; i < s.size(); ++i) {
    const int c = s.comp[size_t(i)];
    long long d = 1;
    if (l == Layout::sym && c >= 3) d = 2;
    if (l == Layout::dev && c <= 1) {
      d = 2;
      const int other = s.find(1 - c, s.pos[size_t(i)]);
      if (other >= 0) e.push_back({i, other, 1});
    }
    e.push_back({i, i, d});
  }
  return IntMatrix::from_entries(s.size(), s.size(), std::move(e));
}

struct TensorComplex {
  ComplexKind kind;
  LatticeComplex lattice;
  IntTriple triple;  // with the intrinsic metrics on H1, H2
};

// h scales every operator by 1/h; dimension counts do not see it.
inline TensorComplex build_tensor_complex(const VoxelDomain& dom, ComplexKind kind, double h = 1.0,
                                          const LatticeOptions& opt = {}) {
  if (!(h > 0.0)) throw InputError("grid spacing must be positive");
  auto ks = kind_stencils(kind);
  TensorComplex tc{kind, build_lattice_complex(dom, to_string(kind), ks.ops, ks.p0, opt), {}};
  const auto lay = kind_layouts(kind);
  for (size_t k = 0; k < 3; ++k) {
    tc.triple.A[k] = tc.lattice.A[k];
    tc.triple.denom[k] = ks.ops[k].denom;
  }
  tc.triple.lambda1 = layout_metric(tc.lattice.space[1], lay[1]);
  tc.triple.lambda2 = layout_metric(tc.lattice.space[2], lay[2]);
  tc.triple.label = to_string(kind) + ":" + dom.label();
  (void)h;
  return tc;
}

// Real operators scaled by the denominators and 1/h.
inline OperatorTriple real_triple(const TensorComplex& tc, double h = 1.0) {
  OperatorTriple t = tc.triple.real();
  t.A0 = RealMatrix(SparseMatrix(t.A0.to_sparse() / h));
  t.A1 = RealMatrix(SparseMatrix(t.A1.to_sparse() / h));
  t.A2 = RealMatrix(SparseMatrix(t.A2.to_sparse() / h));
  return t;
}

inline CohomologyReport tensor_cohomology(const TensorComplex& tc) { return exact_cohomology(tc.triple); }

// dim ker of the adjoint of A2 without boundary conditions (devGrad,
// Gradgrad, symGrad, grad for bih1, bih2, ela, derham).
inline int kernel_dim_no_bc(const TensorComplex& tc) {
  return tc.triple.A[2].rows - exact_rank(tc.triple.A[2]);
}

// Random SPD integer weights: for every cell floor(P/2) the unknowns sharing
// it form one block B = L L^T + I with small integer L.
inline IntMatrix random_block_weight(const LatticeSpace& s, std::mt19937_64& rng, bool diagonal_only = false) {
  std::map<Int3, std::vector<int>> groups;
  for (int i = 0; i < s.size(); ++i) {
    const Int3 p = s.pos[size_t(i)];
    groups[{p[0] / 2, p[1] / 2, p[2] / 2}].push_back(i);
  }
  std::uniform_int_distribution<int> coef(-2, 2), diag(1, 3);
  std::vector<IntEntry> e;
  for (const auto& [cell, idx] : groups) {
    const int n = int(idx.size());
    if (diagonal_only) {
      for (int a = 0; a < n; ++a) e.push_back({idx[size_t(a)], idx[size_t(a)], diag(rng)});
      continue;
    }
    std::vector<long long> L(size_t(n) * n, 0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b) L[size_t(a) * n + b] = coef(rng);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        long long v = (a == b) ? 1 : 0;
        for (int k = 0; k < n; ++k) v += L[size_t(a) * n + k] * L[size_t(b) * n + k];
        if (v) e.push_back({idx[size_t(a)], idx[size_t(b)], v});
      }
  }
  return IntMatrix::from_entries(s.size(), s.size(), std::move(e));
}

struct WeightInvarianceResult {
  bool unchanged = true;
  int trials = 0;
  CohomologyReport reference;
  std::vector<CohomologyReport> weighted;
};

inline WeightInvarianceResult weight_invariance(const TensorComplex& tc, unsigned seed, int trials,
                                                bool diagonal_only = false) {
  WeightInvarianceResult r;
  r.reference = tensor_cohomology(tc);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    IntTriple w = tc.triple;
    w.lambda1 = random_block_weight(tc.lattice.space[1], rng, diagonal_only);
    w.lambda2 = random_block_weight(tc.lattice.space[2], rng, diagonal_only);
    CohomologyReport c = exact_cohomology(w);
    r.unchanged = r.unchanged && c.dim_N0 == r.reference.dim_N0 && c.dim_K1 == r.reference.dim_K1 &&
                  c.dim_K2 == r.reference.dim_K2 && c.dim_N2star == r.reference.dim_N2star &&
                  c.index_D == r.reference.index_D;
    r.weighted.push_back(c);
    ++r.trials;
  }
  return r;
}

}  // namespace fredholm
