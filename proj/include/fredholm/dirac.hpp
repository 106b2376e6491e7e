#pragma once

// Realified Dirac operator L = [[0, Q], [-Q^T, 0]], Q = sum_j d_j sigma_j,
// and its unitary equivalence with the extended Maxwell operator of the
// Dirichlet de Rham complex. Everything is integer; complex numbers only
// appear as pairs (re, im).
//
// Component order: D acts on w = (h1, h2, h3, phi) and produces
// (s, e1, e2, e3). Face cochains c_d (normal d) carry the proxy
// h_d = (-1)^d c_d (0-based d), edges and vertices are used directly.

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "derham.hpp"
#include "exact.hpp"
#include "numerics.hpp"
#include "topology.hpp"

namespace fredholm {

using Mat4i = Eigen::Matrix4i;

struct Complex2x2 {
  Eigen::Matrix2i re, im;
};

struct UnitaryFactors {
  std::array<Complex2x2, 3> sigma;
  Mat4i U, W;  // orthogonal, act on (H3 x H1) and (H2 x H0) components
  Mat4i V;     // realification (Re f, -Im f) of C^2 in (Re, Im) coordinates
  std::array<Mat4i, 3> C;  // displayed coefficient matrices of the realified Q
};

namespace detail {

inline Mat4i mat4(std::initializer_list<int> v) {
  Mat4i m;
  int k = 0;
  for (int x : v) m(k / 4, k % 4) = x, ++k;
  return m;
}

// standard realification a + ib -> [[a, -b], [b, a]] in (Re, Im) coordinates
inline Mat4i realify(const Complex2x2& z) {
  Mat4i m = Mat4i::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const int a = z.re(i, j), b = z.im(i, j);
      m(2 * i, 2 * j) = a;
      m(2 * i, 2 * j + 1) = -b;
      m(2 * i + 1, 2 * j) = b;
      m(2 * i + 1, 2 * j + 1) = a;
    }
  return m;
}

inline bool signed_permutation(const Mat4i& m) {
  for (int i = 0; i < 4; ++i) {
    int nz = 0;
    for (int j = 0; j < 4; ++j) {
      if (m(i, j) != 0 && std::abs(m(i, j)) != 1) return false;
      nz += m(i, j) != 0;
    }
    if (nz != 1) return false;
  }
  return (m * m.transpose()).isIdentity();
}

}  // namespace detail

inline std::array<Complex2x2, 3> pauli_matrices() {
  std::array<Complex2x2, 3> s;
  s[0].re << 0, 1, 1, 0;
  s[0].im.setZero();
  s[1].re.setZero();
  s[1].im << 0, -1, 1, 0;
  s[2].re << 1, 0, 0, -1;
  s[2].im.setZero();
  return s;
}

// U and W exactly as displayed next to the equivalence statement.
inline UnitaryFactors displayed_factors() {
  using detail::mat4;
  UnitaryFactors f;
  f.sigma = pauli_matrices();
  f.W = mat4({0, 0, -1, 0, 0, 0, 0, -1, -1, 0, 0, 0, 0, 1, 0, 0});
  f.U = mat4({0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0});
  f.V = Mat4i::Identity();
  f.V(1, 1) = f.V(3, 3) = -1;
  f.C[0] = mat4({0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0});
  f.C[1] = mat4({0, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0});
  f.C[2] = mat4({1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1});
  return f;
}

// Pair for which D = U Q~ W^T holds with the component order above.
inline UnitaryFactors equivalence_factors() {
  using detail::mat4;
  UnitaryFactors f = displayed_factors();
  f.U = mat4({0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 1, 0, 0, 0});
  f.W = mat4({0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0});
  return f;
}

// coefficient of d_j in the symbol of D = [[div, 0], [curl, grad]]
inline Mat4i derham_symbol(int j) {
  Mat4i m = Mat4i::Zero();
  m(0, j) = 1;      // s = div h
  m(1 + j, 3) = 1;  // e_j gets d_j phi
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      // (curl h)_i = eps_{ijk} d_j h_k
      const int e = (i == j || j == k || i == k) ? 0 : (((j - i + 3) % 3 == 1) ? 1 : -1);
      if (e) m(1 + i, k) += e;
    }
  return m;
}

struct FactorChecks {
  bool sigma_hermitian = false;
  bool sigma_involutive = false;
  bool U_orthogonal = false;
  bool W_orthogonal = false;
  bool V_isometric = false;
  bool V_i_Vstar = false;           // V i V* = [[0,1],[-1,0]] blockwise
  bool coefficients_match = false;  // V realify(sigma_j) V* = C_j
  bool symbol_identity = false;     // derham_symbol(j) = U C_j W^T
  bool all() const {
    return sigma_hermitian && sigma_involutive && U_orthogonal && W_orthogonal && V_isometric && V_i_Vstar &&
           coefficients_match && symbol_identity;
  }
};

inline FactorChecks check_factors(const UnitaryFactors& f) {
  FactorChecks c;
  c.sigma_hermitian = c.sigma_involutive = c.coefficients_match = c.symbol_identity = true;
  for (int j = 0; j < 3; ++j) {
    const auto& s = f.sigma[size_t(j)];
    c.sigma_hermitian &= s.re == s.re.transpose() && s.im == -s.im.transpose();
    const Eigen::Matrix2i sq_re = s.re * s.re - s.im * s.im, sq_im = s.re * s.im + s.im * s.re;
    c.sigma_involutive &= sq_re.isIdentity() && sq_im.isZero();
    c.coefficients_match &= f.V * detail::realify(s) * f.V.transpose() == f.C[size_t(j)];
    c.symbol_identity &= derham_symbol(j) == f.U * f.C[size_t(j)] * f.W.transpose();
  }
  c.U_orthogonal = (f.U * f.U.transpose()).isIdentity() && (f.U.transpose() * f.U).isIdentity();
  c.W_orthogonal = (f.W * f.W.transpose()).isIdentity() && (f.W.transpose() * f.W).isIdentity();
  c.V_isometric = (f.V.transpose() * f.V).isIdentity();
  Complex2x2 iid;
  iid.re.setZero();
  iid.im.setIdentity();
  Mat4i J = Mat4i::Zero();
  J(0, 1) = J(2, 3) = 1;
  J(1, 0) = J(3, 2) = -1;
  c.V_i_Vstar = f.V * detail::realify(iid) * f.V.transpose() == J;
  return c;
}

// ---------------------------------------------------------------------------
// Global assembly

struct ComponentSets {
  std::array<std::vector<Int3>, 4> out;  // physical (s, e1, e2, e3)
  std::array<std::vector<Int3>, 4> in;   // physical (h1, h2, h3, phi)
};

struct DiracAssembly {
  DeRhamSet set;
  ComponentSets phys;
  std::array<int, 4> out_comp{}, in_comp{};    // psi component -> physical component
  std::array<int, 4> out_sign{}, in_sign{};
  IntMatrix Q;  // realified Q~ on (psi_in) -> (psi_out)
  IntMatrix L;  // [[0, Q], [-Q^T, 0]]
  IntMatrix E;  // signed permutation psi space -> cell space of M
  IntMatrix M;  // extended Maxwell on cells
};

namespace detail {

inline ComponentSets component_sets(const DeRhamSet& s) {
  ComponentSets c;
  for (int id : s.cells[3]) c.out[0].push_back(s.cx.cells[3][size_t(id)]);
  for (int id : s.cells[1]) {
    const Int3 p = s.cx.cells[1][size_t(id)];
    for (int k = 0; k < 3; ++k)
      if (p[size_t(k)] & 1) c.out[size_t(1 + k)].push_back(p);
  }
  for (int id : s.cells[2]) {
    const Int3 p = s.cx.cells[2][size_t(id)];
    for (int d = 0; d < 3; ++d)
      if (!(p[size_t(d)] & 1)) c.in[size_t(d)].push_back(p);
  }
  for (int id : s.cells[0]) c.in[3].push_back(s.cx.cells[0][size_t(id)]);
  return c;
}

// psi component a <- physical component given by the signed permutation m
// (physical = m psi).
inline void psi_map(const Mat4i& m, std::array<int, 4>& comp, std::array<int, 4>& sign) {
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 4; ++i)
      if (m(i, a) != 0) {
        comp[size_t(a)] = i;
        sign[size_t(a)] = m(i, a);
      }
}

inline std::vector<int> offsets(const std::array<std::vector<Int3>, 4>& sets, const std::array<int, 4>& comp) {
  std::vector<int> o{0};
  for (int a = 0; a < 4; ++a) o.push_back(o.back() + int(sets[size_t(comp[size_t(a)])].size()));
  return o;
}

}  // namespace detail

inline DiracAssembly assemble_dirac(const VoxelDomain& dom, const UnitaryFactors& f) {
  if (!detail::signed_permutation(f.U) || !detail::signed_permutation(f.W))
    throw InputError("U and W must be signed permutation matrices");
  DiracAssembly a;
  a.set = build_derham(dom, BoundaryCondition::dirichlet);
  a.phys = detail::component_sets(a.set);
  detail::psi_map(f.U, a.out_comp, a.out_sign);
  detail::psi_map(f.W, a.in_comp, a.in_sign);
  const auto oo = detail::offsets(a.phys.out, a.out_comp);
  const auto io = detail::offsets(a.phys.in, a.in_comp);

  // lookup of psi indices by position
  DoubledGrid in_index(dom.box());
  for (int b = 0; b < 4; ++b) {
    const auto& ps = a.phys.in[size_t(a.in_comp[size_t(b)])];
    for (size_t k = 0; k < ps.size(); ++k) in_index.put(ps[k], io[size_t(b)] + int(k));
  }

  // Q~ = sum_j C_j d_j, d_j reading P +- e_j
  std::vector<IntEntry> q;
  for (int a_ = 0; a_ < 4; ++a_) {
    const auto& ps = a.phys.out[size_t(a.out_comp[size_t(a_)])];
    for (size_t k = 0; k < ps.size(); ++k) {
      const int row = oo[size_t(a_)] + int(k);
      for (int j = 0; j < 3; ++j)
        for (int b = 0; b < 4; ++b) {
          const int c = f.C[size_t(j)](a_, b);
          if (!c) continue;
          for (int s : {1, -1}) {
            const Int3 p = ps[k] + unit(j, s);
            const int col = in_index.get(p);
            // in_index holds every psi_in position, so a hit must belong to block b
            if (col >= io[size_t(b)] && col < io[size_t(b) + 1]) q.push_back({row, col, s * c});
          }
        }
    }
  }
  a.Q = IntMatrix::from_entries(oo.back(), io.back(), std::move(q));
  const IntMatrix Qt = a.Q.transpose();
  a.L = detail::assemble_blocks({a.Q.rows, a.Q.cols}, {a.Q.rows, a.Q.cols}, {{0, 1, &a.Q, 1}, {1, 0, &Qt, -1}});

  // identification psi -> cells: psi_out block a is physical comp out_comp[a]
  // times out_sign[a]; faces pick up the proxy sign
  const auto n = a.set.dims();
  const int rows_out = n[3] + n[1];
  std::vector<IntEntry> e;
  for (int a_ = 0; a_ < 4; ++a_) {
    const int pc = a.out_comp[size_t(a_)];
    const auto& ps = a.phys.out[size_t(pc)];
    for (size_t k = 0; k < ps.size(); ++k) {
      const int dim = pc == 0 ? 3 : 1;
      const int cell = a.set.local[size_t(dim)][size_t(a.set.cx.id(ps[k]))];
      const int row = dim == 3 ? cell : n[3] + cell;
      e.push_back({row, oo[size_t(a_)] + int(k), a.out_sign[size_t(a_)]});
    }
  }
  for (int b = 0; b < 4; ++b) {
    const int pc = a.in_comp[size_t(b)];
    const auto& ps = a.phys.in[size_t(pc)];
    for (size_t k = 0; k < ps.size(); ++k) {
      const int dim = pc == 3 ? 0 : 2;
      const int cell = a.set.local[size_t(dim)][size_t(a.set.cx.id(ps[k]))];
      const int row = rows_out + (dim == 2 ? cell : n[2] + cell);
      const int proxy = (dim == 2 && pc == 1) ? -1 : 1;
      e.push_back({row, oo.back() + io[size_t(b)] + int(k), a.in_sign[size_t(b)] * proxy});
    }
  }
  a.E = IntMatrix::from_entries(a.L.rows, a.L.cols, std::move(e));
  const IntMatrix D = derham_block_operator(a.set);
  const IntMatrix Dt = D.transpose();
  a.M = detail::assemble_blocks({D.rows, D.cols}, {D.rows, D.cols}, {{0, 1, &D, 1}, {1, 0, &Dt, -1}});
  return a;
}

inline IntMatrix build_Q(const VoxelDomain& dom) { return assemble_dirac(dom, equivalence_factors()).Q; }

struct DiracOptions {
  bool negative_control = false;  // flip one sign in W before assembling
  bool compare_spectra = true;    // dense SVD when the operator is small enough
};

struct DiracEquivalence {
  FactorChecks factors;
  bool displayed_symbol_identity = false;  // with U, W exactly as displayed
  bool negative_control = false;
  bool equal = false;
  long long differing_entries = 0;
  std::vector<std::string> differing_blocks;
  bool E_orthogonal = false;
  bool M_skew = false;
  bool L_skew = false;
  long long index_Q = 0, index_L = 0, index_D = 0;
  int kernel_M = 0;
  bool spectra_compared = false;
  double spectra_difference = 0;
  std::array<int, 4> dims{};
};

inline DiracEquivalence unitary_equivalence_check(const VoxelDomain& dom, const DiracOptions& opt = {}) {
  DiracEquivalence r;
  UnitaryFactors f = equivalence_factors();
  r.displayed_symbol_identity = check_factors(displayed_factors()).symbol_identity;
  r.negative_control = opt.negative_control;
  if (opt.negative_control) f.W(0, 3) = -f.W(0, 3);
  r.factors = check_factors(f);
  const DiracAssembly a = assemble_dirac(dom, f);
  r.dims = a.set.dims();
  r.E_orthogonal = a.E * a.E.transpose() == IntMatrix::identity(a.E.rows);
  r.M_skew = a.M.transpose() == a.M.scaled(-1);
  r.L_skew = a.L.transpose() == a.L.scaled(-1);

  const IntMatrix conj = a.E * a.L * a.E.transpose();
  std::vector<IntEntry> dif;
  {
    auto ea = a.M.entries(), eb = conj.entries();
    for (auto& x : eb) x.value = -x.value;
    ea.insert(ea.end(), eb.begin(), eb.end());
    dif = IntMatrix::from_entries(a.M.rows, a.M.cols, std::move(ea)).entries();
  }
  r.differing_entries = (long long)dif.size();
  r.equal = dif.empty() && conj.rows == a.M.rows;
  if (!r.equal) {
    const auto n = r.dims;
    const std::vector<int> bounds{0, n[3], n[3] + n[1], n[3] + n[1] + n[2], n[3] + n[1] + n[2] + n[0]};
    const char* names[] = {"H3", "H1", "H2", "H0"};
    std::array<std::array<long long, 4>, 4> cnt{};
    auto block = [&](int i) {
      int b = 0;
      while (i >= bounds[size_t(b + 1)]) ++b;
      return b;
    };
    for (const auto& x : dif) ++cnt[size_t(block(x.row))][size_t(block(x.col))];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (cnt[size_t(i)][size_t(j)])
          r.differing_blocks.push_back(std::string(names[i]) + "x" + names[j] + ": " +
                                       std::to_string(cnt[size_t(i)][size_t(j)]));
  }

  const int rq = exact_rank(a.Q);
  r.index_Q = (long long)(a.Q.cols - rq) - (long long)(a.Q.rows - rq);
  const int rl = exact_rank(a.L);
  r.index_L = (long long)(a.L.cols - rl) - (long long)(a.L.rows - rl);
  r.index_D = derham_index(dom).index_D;
  r.kernel_M = a.M.cols - exact_rank(a.M);

  if (opt.compare_spectra && a.M.rows <= kDenseLimit) {
    const Vector sm = singular_values(RealMatrix(a.M.to_real()));
    const Vector sl = singular_values(RealMatrix(a.L.to_real()));
    r.spectra_compared = true;
    r.spectra_difference = sm.size() == sl.size() ? (sm - sl).cwiseAbs().maxCoeff() : 1.0;
  }
  return r;
}

}  // namespace fredholm
