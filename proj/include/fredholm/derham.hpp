#pragma once

// De Rham complexes on the cubical complex of a voxel domain. Cochains of
// the closed complex give the operators without boundary conditions; the
// Dirichlet ("ring") variant keeps only cells off the boundary for degrees
// 0..2 and all cubes in degree 3, i.e. cochains extended by zero.

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <queue>
#include <string>
#include <vector>

#include "complex.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "lattice.hpp"
#include "numerics.hpp"
#include "topology.hpp"

namespace fredholm {

enum class BoundaryCondition { dirichlet, none };

inline std::string to_string(BoundaryCondition b) { return b == BoundaryCondition::dirichlet ? "dirichlet" : "none"; }

struct DeRhamSet {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  VoxelDomain domain;
  CubicalComplex cx;
  std::array<std::vector<int>, 4> cells;  // complex ids kept per degree
  std::array<std::vector<int>, 4> local;  // complex id -> column, -1 if dropped
  IntMatrix G, C, D;

  IntTriple triple() const {
    IntTriple t;
    t.A = {G, C, D};
    t.denom = {1, 1, 1};
    t.label = "derham-" + to_string(bc) + ":" + domain.label();
    return t;
  }
  std::array<int, 4> dims() const {
    return {int(cells[0].size()), int(cells[1].size()), int(cells[2].size()), int(cells[3].size())};
  }
  // positions and direction (edges) / normal (faces) of the kept cells
  GridField field(int degree, const Vector& v) const {
    if (v.size() != Index(cells[size_t(degree)].size())) throw InputError("cochain size mismatch");
    GridField f;
    for (int id : cells[size_t(degree)]) {
      const Int3 p = cx.cells[size_t(degree)][size_t(id)];
      int c = 0;
      for (int d = 0; d < 3; ++d)
        if ((degree == 1 && (p[size_t(d)] & 1)) || (degree == 2 && !(p[size_t(d)] & 1))) c = d;
      f.pos.push_back(p);
      f.comp.push_back(c);
    }
    f.values = v;
    return f;
  }
};

namespace detail {

inline IntMatrix select(const IntMatrix& m, const std::vector<int>& rowmap, const std::vector<int>& colmap, int nr,
                        int nc) {
  std::vector<IntEntry> e;
  for (int i = 0; i < m.rows; ++i) {
    const int r = rowmap[size_t(i)];
    if (r < 0) continue;
    for (int k = m.ptr[size_t(i)]; k < m.ptr[size_t(i) + 1]; ++k) {
      const int c = colmap[size_t(m.idx[size_t(k)])];
      if (c >= 0) e.push_back({r, c, m.val[size_t(k)]});
    }
  }
  return IntMatrix::from_entries(nr, nc, std::move(e));
}

// Dense block layout of integer blocks (bi, bj, matrix, sign).
struct IntBlock {
  int bi, bj;
  const IntMatrix* m;
  long long sign;
};

inline IntMatrix assemble_blocks(const std::vector<int>& row_sizes, const std::vector<int>& col_sizes,
                                 const std::vector<IntBlock>& blocks) {
  std::vector<int> ro{0}, co{0};
  for (int s : row_sizes) ro.push_back(ro.back() + s);
  for (int s : col_sizes) co.push_back(co.back() + s);
  std::vector<IntEntry> e;
  for (const auto& b : blocks) {
    if (b.m->rows != row_sizes[size_t(b.bi)] || b.m->cols != col_sizes[size_t(b.bj)])
      throw InvariantViolation("block size mismatch in assembly");
    for (const auto& x : b.m->entries()) e.push_back({ro[size_t(b.bi)] + x.row, co[size_t(b.bj)] + x.col, b.sign * x.value});
  }
  return IntMatrix::from_entries(ro.back(), co.back(), std::move(e));
}

}  // namespace detail

inline DeRhamSet build_derham(const VoxelDomain& dom, BoundaryCondition bc) {
  DeRhamSet s;
  s.bc = bc;
  s.domain = dom;
  s.cx = build_complex(dom);
  for (size_t k = 0; k < 4; ++k) {
    s.local[k].assign(s.cx.cells[k].size(), -1);
    for (size_t i = 0; i < s.cx.cells[k].size(); ++i) {
      const bool keep = bc == BoundaryCondition::none || k == 3 || inside_domain(dom, s.cx.cells[k][i]);
      if (keep) {
        s.local[k][i] = int(s.cells[k].size());
        s.cells[k].push_back(int(i));
      }
    }
  }
  const auto n = s.dims();
  s.G = detail::select(s.cx.boundary[0].transpose(), s.local[1], s.local[0], n[1], n[0]);
  s.C = detail::select(s.cx.boundary[1].transpose(), s.local[2], s.local[1], n[2], n[1]);
  s.D = detail::select(s.cx.boundary[2].transpose(), s.local[3], s.local[2], n[3], n[2]);
  return s;
}

inline bool derham_complex_exact(const DeRhamSet& s) { return (s.C * s.G).is_zero() && (s.D * s.C).is_zero(); }

// dim ker A nonnegative integer through exact ranks
inline int kernel_dim(const IntMatrix& a) { return a.cols - exact_rank(a); }

inline CohomologyReport derham_index(const VoxelDomain& dom) {
  return exact_cohomology(build_derham(dom, BoundaryCondition::dirichlet).triple());
}

// ---------------------------------------------------------------------------
// Laplace solves

struct DirichletSolution {
  GridField u;     // on every vertex of the closed complex
  Vector grad;     // grad u on the Dirichlet edges
  double residual = 0;  // discrete Laplacian on interior vertices
  bool empty = true;
};

namespace detail {

inline SparseMatrix graph_laplacian(const IntMatrix& g) {
  const SparseMatrix G = g.to_real();
  return SparseMatrix(G.transpose() * G);
}

}  // namespace detail

// u = 1 on boundary vertices touching cavity l, 0 on the other boundary
// vertices, discrete harmonic inside.
inline DirichletSolution solve_dirichlet_laplace(const VoxelDomain& dom, int l) {
  const ComplementComponents cc = complement_components(dom);
  DirichletSolution sol;
  if (cc.count <= 1) return sol;
  if (l < 1 || l >= cc.count)
    throw InputError("cavity index " + std::to_string(l) + " out of range 1.." + std::to_string(cc.count - 1));
  const DeRhamSet full = build_derham(dom, BoundaryCondition::none);
  const DeRhamSet ring = build_derham(dom, BoundaryCondition::dirichlet);
  const auto& verts = full.cx.cells[0];
  const int nv = int(verts.size());

  std::vector<int> interior(size_t(nv), -1);
  Vector ub = Vector::Zero(nv);
  int ni = 0;
  for (int i = 0; i < nv; ++i) {
    if (inside_domain(dom, verts[size_t(i)])) {
      interior[size_t(i)] = ni++;
      continue;
    }
    bool mine = false, other = false;
    for (const auto& v : adjacent_voxels(verts[size_t(i)])) {
      if (dom.has(v) || !dom.in_box(v)) continue;
      const int lab = cc.label[dom.flat(v)];
      if (lab == l) mine = true;
      else other = true;
    }
    if (mine && other)
      throw GeometryError("vertex touches cavity " + std::to_string(l) + " and another boundary component");
    ub[i] = mine ? 1.0 : 0.0;
  }
  const SparseMatrix L = detail::graph_laplacian(full.G);
  std::vector<Triplet> tii;
  Vector rhs = Vector::Zero(ni);
  for (Index k = 0; k < L.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(L, k); it; ++it) {
      const int r = interior[size_t(it.row())];
      if (r < 0) continue;
      const int c = interior[size_t(it.col())];
      if (c >= 0) tii.emplace_back(r, c, it.value());
      else rhs[r] -= it.value() * ub[it.col()];
    }
  Vector u = ub;
  if (ni > 0) {
    SparseMatrix Lii(ni, ni);
    Lii.setFromTriplets(tii.begin(), tii.end());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(Lii);
    if (ldlt.info() != Eigen::Success) throw InvariantViolation("interior Laplacian is not positive definite");
    const Vector ui = ldlt.solve(rhs);
    for (int i = 0; i < nv; ++i)
      if (interior[size_t(i)] >= 0) u[i] = ui[interior[size_t(i)]];
  }
  const Vector lu = L * u;
  for (int i = 0; i < nv; ++i)
    if (interior[size_t(i)] >= 0) sol.residual = std::max(sol.residual, std::abs(lu[i]));

  const Vector gfull = full.G.to_real() * u;
  sol.grad = Vector::Zero(Index(ring.cells[1].size()));
  for (size_t e = 0; e < full.cells[1].size(); ++e) {
    const int r = ring.local[1][e];
    if (r >= 0) sol.grad[r] = gfull[Index(e)];
    else if (std::abs(gfull[Index(e)]) > 0.0)
      throw GeometryError("a boundary edge joins two boundary components; domain too thin");
  }
  sol.u = full.field(0, u);
  sol.empty = false;
  return sol;
}

namespace detail {

// connected components of the vertex graph of G (edges x vertices)
inline std::vector<int> vertex_components(const IntMatrix& g, int* count) {
  const IntMatrix gt = g.transpose();
  std::vector<int> comp(size_t(g.cols), -1);
  int c = 0;
  for (int s = 0; s < g.cols; ++s) {
    if (comp[size_t(s)] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[size_t(s)] = c;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int k = gt.ptr[size_t(v)]; k < gt.ptr[size_t(v) + 1]; ++k) {
        const int e = gt.idx[size_t(k)];
        for (int kk = g.ptr[size_t(e)]; kk < g.ptr[size_t(e) + 1]; ++kk) {
          const int w = g.idx[size_t(kk)];
          if (comp[size_t(w)] < 0) {
            comp[size_t(w)] = c;
            q.push(w);
          }
        }
      }
    }
    ++c;
  }
  if (count) *count = c;
  return comp;
}

// least squares G psi ~ theta with mean zero per component
inline Vector neumann_potential(const IntMatrix& g, const Vector& theta) {
  const SparseMatrix G = g.to_real();
  const SparseMatrix L = SparseMatrix(G.transpose() * G);
  const Vector rhs = G.transpose() * theta;
  int nc = 0;
  const std::vector<int> comp = vertex_components(g, &nc);
  std::vector<int> ground(size_t(nc), -1), col(size_t(g.cols), -1);
  int n = 0;
  for (int v = 0; v < g.cols; ++v) {
    if (ground[size_t(comp[size_t(v)])] < 0) ground[size_t(comp[size_t(v)])] = v;
    else col[size_t(v)] = n++;
  }
  std::vector<Triplet> t;
  Vector b(n);
  for (int v = 0; v < g.cols; ++v)
    if (col[size_t(v)] >= 0) b[col[size_t(v)]] = rhs[v];
  for (Index k = 0; k < L.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(L, k); it; ++it) {
      const int r = col[size_t(it.row())], c = col[size_t(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  Vector psi = Vector::Zero(g.cols);
  if (n > 0) {
    SparseMatrix A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw InvariantViolation("grounded Neumann Laplacian is singular");
    const Vector x = ldlt.solve(b);
    for (int v = 0; v < g.cols; ++v)
      if (col[size_t(v)] >= 0) psi[v] = x[col[size_t(v)]];
  }
  std::vector<double> mean(size_t(nc), 0.0);
  std::vector<int> cnt(size_t(nc), 0);
  for (int v = 0; v < g.cols; ++v) {
    mean[size_t(comp[size_t(v)])] += psi[v];
    ++cnt[size_t(comp[size_t(v)])];
  }
  for (int v = 0; v < g.cols; ++v) psi[v] -= mean[size_t(comp[size_t(v)])] / cnt[size_t(comp[size_t(v)])];
  return psi;
}

inline double pair_field(const Vector& f, const std::vector<EdgeStep>& loop) {
  double s = 0;
  for (const auto& st : loop) s += st.sign * f[st.edge];
  return s;
}

}  // namespace detail

struct NeumannSolution {
  GridField psi;     // on every vertex
  Vector theta;      // cut cocycle on every edge
  Vector projected;  // theta - grad psi
  double divergence_residual = 0;
  bool empty = true;
};

inline NeumannSolution solve_neumann_laplace(const DeRhamSet& full, const HandleSystem& hs, int j) {
  NeumannSolution sol;
  if (hs.cocycles.empty()) return sol;
  if (j < 1 || j > int(hs.cocycles.size()))
    throw InputError("cut index " + std::to_string(j) + " out of range 1.." + std::to_string(hs.cocycles.size()));
  const auto& c = hs.cocycles[size_t(j - 1)];
  sol.theta = Vector(Index(c.size()));
  for (size_t e = 0; e < c.size(); ++e) sol.theta[Index(e)] = double(c[e]);
  const Vector psi = detail::neumann_potential(full.G, sol.theta);
  sol.projected = sol.theta - full.G.to_real() * psi;
  sol.divergence_residual = (full.G.to_real().transpose() * sol.projected).cwiseAbs().maxCoeff();
  sol.psi = full.field(0, psi);
  sol.empty = false;
  return sol;
}

inline NeumannSolution solve_neumann_laplace(const VoxelDomain& dom, int j) {
  const DeRhamSet full = build_derham(dom, BoundaryCondition::none);
  const int p = betti_numbers(full.cx)[1];
  return solve_neumann_laplace(full, handle_system(full.cx, p), j);
}

// ---------------------------------------------------------------------------
// Harmonic fields

struct HarmonicFields {
  int dim = 0;                       // exact
  DenseMatrix basis;                 // orthonormal, columns on the edge space
  std::vector<Vector> constructed;   // grad u_l or pi Theta_l
  DenseMatrix pairing;               // Neumann: beta_l(pi Theta_j), rows l
  double kernel_residual = 0;        // |H basis| / |H|
  double constructed_residual = 0;   // worst curl / div residual of the constructed fields
  std::vector<std::string> flags;
  GridField layout;                  // edge positions and directions
};

namespace detail {

inline SparseMatrix hodge_laplacian_1(const IntMatrix& g, const IntMatrix& c) {
  const SparseMatrix G = g.to_real(), C = c.to_real();
  return SparseMatrix(SparseMatrix(C.transpose() * C) + SparseMatrix(G * G.transpose()));
}

}  // namespace detail

// ker(curl) cap ker(div) on the Dirichlet edges; dim m - 1.
inline HarmonicFields harmonic_dirichlet_fields(const VoxelDomain& dom) {
  const DeRhamSet ring = build_derham(dom, BoundaryCondition::dirichlet);
  HarmonicFields h;
  h.dim = int(exact_cohomology(ring.triple()).dim_K1);
  h.basis = psd_kernel_basis(detail::hodge_laplacian_1(ring.G, ring.C), h.dim, 7, &h.kernel_residual);
  const int m = complement_components(dom).count;
  const SparseMatrix C = ring.C.to_real(), Gt = SparseMatrix(ring.G.to_real().transpose());
  for (int l = 1; l < m; ++l) {
    const DirichletSolution s = solve_dirichlet_laplace(dom, l);
    h.constructed.push_back(s.grad);
    const double sc = std::max(1.0, s.grad.norm());
    h.constructed_residual = std::max({h.constructed_residual, (C * s.grad).norm() / sc, (Gt * s.grad).norm() / sc});
  }
  if (h.kernel_residual > 1e-8) h.flags.push_back("dirichlet kernel basis residual " + std::to_string(h.kernel_residual));
  h.layout = ring.field(1, Vector::Zero(Index(ring.cells[1].size())));
  return h;
}

// ker(div with boundary condition) cap ker(curl) on all edges; dim p.
inline HarmonicFields harmonic_neumann_fields(const VoxelDomain& dom) {
  const DeRhamSet full = build_derham(dom, BoundaryCondition::none);
  HarmonicFields h;
  h.dim = int(exact_cohomology(full.triple()).dim_K1);
  h.basis = psd_kernel_basis(detail::hodge_laplacian_1(full.G, full.C), h.dim, 7, &h.kernel_residual);
  const HandleSystem hs = handle_system(full.cx, h.dim);
  const SparseMatrix C = full.C.to_real();
  for (int j = 1; j <= h.dim; ++j) {
    const NeumannSolution s = solve_neumann_laplace(full, hs, j);
    h.constructed.push_back(s.projected);
    const double sc = std::max(1.0, s.projected.norm());
    h.constructed_residual =
        std::max({h.constructed_residual, (C * s.projected).norm() / sc, s.divergence_residual / sc});
  }
  h.pairing = DenseMatrix::Zero(h.dim, h.dim);
  for (int l = 0; l < h.dim; ++l)
    for (int j = 0; j < h.dim; ++j) h.pairing(l, j) = detail::pair_field(h.constructed[size_t(j)], hs.loop_edges[size_t(l)]);
  if (h.dim > 0 && std::abs(h.pairing.determinant()) < 1e-8) h.flags.push_back("pairing-degeneracy");
  if (h.kernel_residual > 1e-8) h.flags.push_back("neumann kernel basis residual " + std::to_string(h.kernel_residual));
  h.layout = full.field(1, Vector::Zero(Index(full.cells[1].size())));
  return h;
}

// Friedrichs constant of the Dirichlet gradient: 1 / sigma_min^+.
inline double friedrichs_constant(const VoxelDomain& dom) {
  const DeRhamSet ring = build_derham(dom, BoundaryCondition::dirichlet);
  if (ring.G.cols == 0) return 0.0;
  return 1.0 / smallest_positive_singular_value(RealMatrix(ring.G.to_real()));
}

// ---------------------------------------------------------------------------
// Extended Maxwell operator [[0, D], [-D^T, 0]] on (H3 x H1) x (H2 x H0),
// D = [[div, 0], [curl, grad]] with Dirichlet conditions on H0..H2.

struct MaxwellOperator {
  IntMatrix M;
  IntMatrix D;  // (d3 + d1) x (d2 + d0)
  std::array<int, 4> dims{};
  bool skew = false;
  int kernel_dim = 0;
  int cokernel_dim = 0;
  long long index() const { return (long long)kernel_dim - cokernel_dim; }
};

inline IntMatrix derham_block_operator(const DeRhamSet& s) {
  const auto n = s.dims();
  const IntMatrix Ct = s.C.transpose();
  return detail::assemble_blocks({n[3], n[1]}, {n[2], n[0]}, {{0, 0, &s.D, 1}, {1, 0, &Ct, 1}, {1, 1, &s.G, 1}});
}

inline MaxwellOperator extended_maxwell(const VoxelDomain& dom) {
  const DeRhamSet s = build_derham(dom, BoundaryCondition::dirichlet);
  MaxwellOperator op;
  op.dims = s.dims();
  op.D = derham_block_operator(s);
  const IntMatrix Dt = op.D.transpose();
  const int a = op.D.rows, b = op.D.cols;
  op.M = detail::assemble_blocks({a, b}, {a, b}, {{0, 1, &op.D, 1}, {1, 0, &Dt, -1}});
  op.skew = op.M.transpose() == op.M.scaled(-1);
  const int r = exact_rank(op.M);
  op.kernel_dim = op.M.cols - r;
  op.cokernel_dim = op.M.rows - r;
  return op;
}

}  // namespace fredholm
