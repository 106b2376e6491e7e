#pragma once

// Explicit Dirichlet and Neumann bases.
//
// Dirichlet (H1, k(m-1) fields): f = A0(xi_l p_j) with xi_l = 1 near cavity l
// and 0 near every other boundary component, then f - A0 psi with
// A0^T l1 A0 psi = A0^T l1 f.
//
// Neumann (H2, kp fields): an angle function theta_j with period delta_lj
// along deep loop l, Theta_{j,k} = s l2^-1 A2^T(theta~_j r_k) evaluated
// row-wise on locally consistent lifts (A2^T kills r_k, so the integer lift
// drops out), then Theta - l2^-1 A2^T psi with A2 l2^-1 A2^T psi = A2 Theta.
//
// The de Rham kind uses the cubical fields of derham.hpp.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "complex.hpp"
#include "derham.hpp"
#include "errors.hpp"
#include "exact.hpp"
#include "lattice.hpp"
#include "numerics.hpp"
#include "poincare.hpp"
#include "tensor.hpp"
#include "topology.hpp"

namespace fredholm {

enum class BasisKind { dirichlet, neumann };

inline std::string to_string(BasisKind b) { return b == BasisKind::dirichlet ? "dirichlet" : "neumann"; }

inline BasisKind parse_basis_kind(const std::string& s) {
  if (s == "dirichlet") return BasisKind::dirichlet;
  if (s == "neumann") return BasisKind::neumann;
  throw InputError("unknown basis kind '" + s + "' (expected dirichlet or neumann)");
}

// Polynomial factor of a multiplier field: scalar {1, x_k}, Raviart-Thomas
// {x, e_k} or rigid motions {e_k x x, e_k}.
enum class MultiplierFamily { affine, raviart_thomas, rigid_motion };

inline std::string to_string(MultiplierFamily f) {
  switch (f) {
    case MultiplierFamily::affine: return "affine";
    case MultiplierFamily::raviart_thomas: return "raviart-thomas";
    case MultiplierFamily::rigid_motion: return "rigid-motion";
  }
  return "?";
}

inline int family_size(MultiplierFamily f) { return f == MultiplierFamily::rigid_motion ? 6 : 4; }

// component c of the k-th polynomial factor at x
inline double multiplier_value(MultiplierFamily f, int k, int c, const Point3& x) {
  switch (f) {
    case MultiplierFamily::affine: return k == 0 ? 1.0 : x[size_t(k - 1)];
    case MultiplierFamily::raviart_thomas: return k == 0 ? x[size_t(c)] : (c == k - 1 ? 1.0 : 0.0);
    case MultiplierFamily::rigid_motion: {
      if (k >= 3) return c == k - 3 ? 1.0 : 0.0;
      double v = 0;  // (e_k x x)_c = eps_{c k m} x_m
      for (int m = 0; m < 3; ++m) v += layout::levi_civita(c, k, m) * x[size_t(m)];
      return v;
    }
  }
  return 0;
}

// family used on the potential space: H0 for Dirichlet, H3 for Neumann
inline MultiplierFamily multiplier_family(ComplexKind kind, BasisKind which) {
  const Layout l = kind_layouts(kind)[which == BasisKind::dirichlet ? 0 : 3];
  if (l == Layout::scalar) return MultiplierFamily::affine;
  return kind == ComplexKind::ela ? MultiplierFamily::rigid_motion : MultiplierFamily::raviart_thomas;
}

struct MultiplierField {
  BasisKind which = BasisKind::dirichlet;
  int index = 0;     // cavity l (Dirichlet) or handle j (Neumann), 1-based
  int factor = 0;    // polynomial factor k
  MultiplierFamily family = MultiplierFamily::affine;
  Vector raw;        // A0(xi p) or Theta before projection
  Vector projected;
  double kernel_A1_residual = 0;  // |A1 raw| (Dirichlet) or |A1* raw| (Neumann)
};

struct BasisOptions {
  int collar = 1;      // xi = 1 up to voxel distance collar, 0 from 2 collar on
  double tol = 1e-6;   // span and functional tolerance
  bool compute_kernel_basis = true;
};

struct BasisSet {
  ComplexKind kind = ComplexKind::derham;
  BasisKind which = BasisKind::dirichlet;
  int expected_count = 0;  // k(m-1) or kp from the topology
  int verified_dim = 0;    // exact cohomology dimension
  std::vector<MultiplierField> multipliers;
  std::vector<Vector> fields;  // projected fields
  GridField layout;            // positions and components of the space
  DenseMatrix gram;            // metric Gram matrix of the fields
  std::optional<FunctionalMatrix> functionals;
  Eigen::MatrixXd expected_functionals;
  double functional_error = 0;
  double projection_functional_gap = 0;  // |beta(pi Theta) - beta(Theta)|
  double membership_residual = 0;   // both kernel conditions, relative
  double orthogonality_residual = 0;
  DenseMatrix kernel_basis;         // orthonormal basis of the cohomology space
  double kernel_residual = 0;
  std::vector<std::string> notes;

  int count() const { return int(fields.size()); }
  double gram_condition() const {
    if (gram.rows() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(gram);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
};

namespace detail {

// Inverse of a block-diagonal SPD integer metric, block by block.
inline SparseMatrix metric_inverse(const IntMatrix& lam) {
  const int n = lam.rows;
  std::vector<int> blk(size_t(n), -1);
  std::vector<std::vector<int>> blocks;
  for (int i = 0; i < n; ++i) {
    if (blk[size_t(i)] >= 0) continue;
    std::vector<int> b{i};
    blk[size_t(i)] = int(blocks.size());
    for (size_t h = 0; h < b.size(); ++h)
      for (int k = lam.ptr[size_t(b[h])]; k < lam.ptr[size_t(b[h]) + 1]; ++k) {
        const int j = lam.idx[size_t(k)];
        if (blk[size_t(j)] < 0) {
          blk[size_t(j)] = int(blocks.size());
          b.push_back(j);
        }
      }
    blocks.push_back(std::move(b));
  }
  std::vector<Triplet> t;
  for (const auto& b : blocks) {
    const int s = int(b.size());
    DenseMatrix m = DenseMatrix::Zero(s, s);
    for (int a = 0; a < s; ++a)
      for (int k = lam.ptr[size_t(b[size_t(a)])]; k < lam.ptr[size_t(b[size_t(a)]) + 1]; ++k)
        for (int c = 0; c < s; ++c)
          if (b[size_t(c)] == lam.idx[size_t(k)]) m(a, c) = double(lam.val[size_t(k)]);
    const DenseMatrix inv = m.inverse();
    for (int a = 0; a < s; ++a)
      for (int c = 0; c < s; ++c)
        if (inv(a, c) != 0.0) t.emplace_back(b[size_t(a)], b[size_t(c)], inv(a, c));
  }
  SparseMatrix r(n, n);
  r.setFromTriplets(t.begin(), t.end());
  return r;
}

inline Point3 physical(const Int3& p) { return {p[0] / 2.0, p[1] / 2.0, p[2] / 2.0}; }

// multi-source BFS through domain voxels from complement component l
inline std::vector<int> cavity_distance(const VoxelDomain& dom, const ComplementComponents& cc, int l) {
  const Int3 b = dom.box();
  const int inf = std::numeric_limits<int>::max();
  std::vector<int> dist(size_t(b[0]) * b[1] * b[2], inf);
  std::deque<Int3> q;
  for (int x = 0; x < b[0]; ++x)
    for (int y = 0; y < b[1]; ++y)
      for (int z = 0; z < b[2]; ++z) {
        const Int3 v{x, y, z};
        if (!dom.has(v) && cc.label[dom.flat(v)] == l) {
          dist[dom.flat(v)] = 0;
          q.push_back(v);
        }
      }
  while (!q.empty()) {
    const Int3 v = q.front();
    q.pop_front();
    for (int d = 0; d < 3; ++d)
      for (int s : {-1, 1}) {
        Int3 w = v;
        w[size_t(d)] += s;
        if (!dom.has(w) || dist[dom.flat(w)] != inf) continue;
        dist[dom.flat(w)] = dist[dom.flat(v)] + 1;
        q.push_back(w);
      }
  }
  return dist;
}

inline double collar_ramp(int d, int collar) {
  if (d == std::numeric_limits<int>::max()) return 0.0;
  if (d <= collar) return 1.0;
  if (d >= 2 * collar) return 0.0;
  return double(2 * collar - d) / double(collar);
}

// Fixed rows of the weighted least-squares problems, reused per field.
struct PotentialSolver {
  SparseMatrix A, W;  // operator and metric on its range space
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Vector project(const Vector& f) const {  // f - A psi, A^T W A psi = A^T W f
    const Vector psi = ldlt.solve(SparseMatrix(A.transpose()) * (W * f));
    return f - A * psi;
  }
};

inline bool has_entries(const SparseMatrix& m) { return m.nonZeros() > 0; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Angle functions for the Neumann construction

struct AngleFunctions {
  CubicalComplex cx;                         // closed complex of the domain
  std::vector<std::vector<Int3>> deep_loops;  // closed vertex walks in the eroded domain
  std::vector<Vector> harmonic;               // edge fields, period delta_lj on deep loop l
  std::vector<Vector> vertex_values;          // tree integral of harmonic[j]
};

namespace detail {

inline std::vector<EdgeStep> loop_on_complex(const CubicalComplex& cx, const std::vector<Int3>& walk) {
  std::vector<EdgeStep> e;
  for (size_t s = 0; s + 1 < walk.size(); ++s) {
    const Int3 a = walk[s], b = walk[s + 1];
    const Int3 mid{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
    const int id = cx.id(mid);
    if (id < 0 || cell_dim(mid) != 1) throw InvariantViolation("deep loop leaves the complex");
    const Int3 d = b - a;
    e.push_back({id, d[0] + d[1] + d[2] > 0 ? 1 : -1});
  }
  return e;
}

}  // namespace detail

inline AngleFunctions angle_functions(const VoxelDomain& dom) {
  AngleFunctions af;
  const DeRhamSet full = build_derham(dom, BoundaryCondition::none);
  af.cx = full.cx;
  const int p = betti_numbers(full.cx)[1];
  if (p == 0) return af;
  const VoxelDomain deep = erode(dom);
  if (deep.count() == 0) throw GeometryError("cut collar too thin: the eroded domain is empty");
  const CubicalComplex dcx = build_complex(deep);
  if (betti_numbers(dcx)[1] != p) throw GeometryError("cut collar too thin: erosion changes the number of handles");
  af.deep_loops = handle_system(dcx, p).loops;

  const HandleSystem hs = handle_system(full.cx, p);
  // pairing P[l][j] = <cocycle_j, deep loop l>
  std::vector<std::vector<EdgeStep>> deep_edges;
  for (const auto& w : af.deep_loops) deep_edges.push_back(detail::loop_on_complex(full.cx, w));
  std::vector<std::vector<long long>> P(size_t(p), std::vector<long long>(size_t(p), 0));
  for (int l = 0; l < p; ++l)
    for (int j = 0; j < p; ++j) P[size_t(l)][size_t(j)] = pair_cochain(hs.cocycles[size_t(j)], deep_edges[size_t(l)]);
  const long long det = integer_determinant(P);
  if (std::llabs(det) != 1) throw GeometryError("deep loops do not pair unimodularly with the cut cocycles");
  DenseMatrix Pd(p, p);
  for (int l = 0; l < p; ++l)
    for (int j = 0; j < p; ++j) Pd(l, j) = double(P[size_t(l)][size_t(j)]);
  const DenseMatrix Pinv = Pd.inverse();

  const SparseMatrix G = full.G.to_real();
  const int ne = full.G.rows, nv = full.G.cols;
  for (int i = 0; i < p; ++i) {
    Vector c = Vector::Zero(ne);
    for (int j = 0; j < p; ++j) {
      const double w = std::round(Pinv(j, i));
      for (int e = 0; e < ne; ++e) c[e] += w * double(hs.cocycles[size_t(j)][size_t(e)]);
    }
    const Vector h = c - G * detail::neumann_potential(full.G, c);
    af.harmonic.push_back(h);
  }
  // integrate along a BFS tree of the vertex graph
  const IntMatrix gt = full.G.transpose();
  for (const auto& h : af.harmonic) {
    Vector F = Vector::Zero(nv);
    std::vector<char> seen(size_t(nv), 0);
    for (int s = 0; s < nv; ++s) {
      if (seen[size_t(s)]) continue;
      seen[size_t(s)] = 1;
      std::deque<int> q{s};
      while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int k = gt.ptr[size_t(v)]; k < gt.ptr[size_t(v) + 1]; ++k) {
          const int e = gt.idx[size_t(k)];
          const long long sv = gt.val[size_t(k)];  // +1 if v is the head of e
          for (int kk = full.G.ptr[size_t(e)]; kk < full.G.ptr[size_t(e) + 1]; ++kk) {
            const int w = full.G.idx[size_t(kk)];
            if (seen[size_t(w)]) continue;
            seen[size_t(w)] = 1;
            // F(head) - F(tail) = h(e)
            F[w] = F[v] + (sv > 0 ? -h[e] : h[e]);
            q.push_back(w);
          }
        }
      }
    }
    af.vertex_values.push_back(F);
  }
  return af;
}

namespace detail {

// Lifted angle at a cell: average over its vertices, integrating the
// harmonic field along cell edges from the first vertex.
inline double cell_angle(const AngleFunctions& af, int j, const Int3& P) {
  std::vector<Int3> verts{P};
  for (int d = 0; d < 3; ++d) {
    if (!(P[size_t(d)] & 1)) continue;
    std::vector<Int3> next;
    for (const auto& v : verts) {
      next.push_back(v - unit(d));
      next.push_back(v + unit(d));
    }
    verts = next;
  }
  const Vector& F = af.vertex_values[size_t(j)];
  const Vector& h = af.harmonic[size_t(j)];
  const Int3 v0 = verts[0];
  const int i0 = af.cx.id(v0);
  if (i0 < 0) throw InvariantViolation("angle requested outside the closed complex");
  double sum = 0;
  for (const auto& v : verts) {
    // monotone walk v0 -> v along +2 e_d steps (v0 is the lowest corner)
    double val = F[i0];
    Int3 cur = v0;
    for (int d = 0; d < 3; ++d)
      while (cur[size_t(d)] < v[size_t(d)]) {
        const int e = af.cx.id(cur + unit(d));
        if (e < 0) throw InvariantViolation("cell edge missing from the closed complex");
        val += h[e];
        cur[size_t(d)] += 2;
      }
    sum += val;
  }
  return sum / double(verts.size());
}

inline double smooth_step(double s) {
  const double f = std::floor(s), r = s - f;
  const double rho = r <= 1.0 / 3 ? 0.0 : (r >= 2.0 / 3 ? 1.0 : 3.0 * r - 1.0);
  return f + rho;
}

inline double kind_sign(ComplexKind k) { return k == ComplexKind::bih2 ? 1.0 : -1.0; }

}  // namespace detail

// Deep loops on the base lattice of the walker. The walkers read up to
// B + 2 (1,1,1), so base points sit on the lower side of each deep vertex.
inline std::vector<LatticeLoop> deep_lattice_loops(const AngleFunctions& af, ComplexKind kind) {
  std::vector<LatticeLoop> out;
  const Int3 off = base_offset(kind);
  for (const auto& w : af.deep_loops) {
    LatticeLoop l;
    for (const auto& v : w) l.base.push_back(v - off);
    out.push_back(l);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builders

namespace detail {

inline double max_col_residual(const SparseMatrix& A, const std::vector<Vector>& f) {
  double r = 0;
  for (const auto& v : f) r = std::max(r, (A * v).norm() / std::max(1e-300, v.norm()));
  return r;
}

inline void finish_set(BasisSet& b, const SparseMatrix& metric) {
  const int n = b.count();
  b.gram = DenseMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b.gram(i, j) = b.fields[size_t(i)].dot(metric * b.fields[size_t(j)]);
}

inline BasisSet derham_basis(const VoxelDomain& dom, BasisKind which) {
  BasisSet b;
  b.kind = ComplexKind::derham;
  b.which = which;
  const TopologyInvariants inv = invariants(dom);
  b.expected_count = which == BasisKind::dirichlet ? inv.m - 1 : inv.p;
  const HarmonicFields h = which == BasisKind::dirichlet ? harmonic_dirichlet_fields(dom) : harmonic_neumann_fields(dom);
  b.verified_dim = h.dim;
  b.fields = h.constructed;
  b.layout = h.layout;
  b.kernel_basis = h.basis;
  b.kernel_residual = h.kernel_residual;
  b.membership_residual = h.constructed_residual;
  for (size_t i = 0; i < b.fields.size(); ++i) {
    MultiplierField m;
    m.which = which;
    m.index = int(i) + 1;
    m.projected = b.fields[i];
    b.multipliers.push_back(m);
  }
  const DeRhamSet s = build_derham(dom, which == BasisKind::dirichlet ? BoundaryCondition::dirichlet
                                                                      : BoundaryCondition::none);
  const SparseMatrix Gt = SparseMatrix(s.G.to_real().transpose());
  b.orthogonality_residual = max_col_residual(Gt, b.fields);
  finish_set(b, sparse_identity(s.G.rows));
  if (which == BasisKind::neumann && h.dim > 0) {
    const HandleSystem hs = handle_system(s.cx, h.dim);
    FunctionalMatrix fm;
    fm.kind = ComplexKind::derham;
    fm.loops = h.dim;
    for (const auto& l : hs.loops) fm.anchors.push_back(physical(l.front()));
    fm.values = h.pairing.transpose();  // rows fields, columns loops
    b.expected_functionals = expected_functional_matrix(ComplexKind::derham, fm.anchors);
    b.functional_error = (fm.values - b.expected_functionals).cwiseAbs().maxCoeff();
    b.functionals = fm;
  }
  for (const auto& f : h.flags) b.notes.push_back(f);
  if (b.fields.empty()) b.notes.push_back("no " + to_string(which) + " fields: the cohomology space is trivial");
  return b;
}

}  // namespace detail

inline BasisSet dirichlet_basis(const VoxelDomain& dom, const TensorComplex& tc, const BasisOptions& opt = {},
                                std::optional<int> known_dim = std::nullopt) {
  BasisSet b;
  b.kind = tc.kind;
  b.which = BasisKind::dirichlet;
  const ComplementComponents cc = complement_components(dom);
  const int k = kind_multiplicity(tc.kind);
  b.expected_count = k * (cc.count - 1);
  b.verified_dim = known_dim ? *known_dim : int(tensor_cohomology(tc).dim_K1);
  const auto& L = tc.lattice;
  const LatticeSpace& H0 = L.space[0];
  const LatticeSpace& H1 = L.space[1];
  b.layout = grid_field(H1, Vector::Zero(H1.size()));

  const SparseMatrix A0 = tc.triple.A[0].to_real(1.0 / double(tc.triple.denom[0]));
  const SparseMatrix A1 = tc.triple.A[1].to_real(1.0 / double(tc.triple.denom[1]));
  const SparseMatrix l1 = tc.triple.lambda1.to_real();
  detail::PotentialSolver ps;
  ps.A = A0;
  ps.W = l1;
  if (H0.size() > 0) {
    ps.ldlt.compute(SparseMatrix(SparseMatrix(A0.transpose()) * l1 * A0));
    if (ps.ldlt.info() != Eigen::Success) throw InvariantViolation("Dirichlet potential system is singular");
  }

  const MultiplierFamily fam = multiplier_family(tc.kind, BasisKind::dirichlet);
  const Stencil& op = L.ops[0];
  const Int3 ext = DoubledGrid(dom.box()).extent();
  auto in_grid = [&](const Int3& p) {
    return p[0] >= 0 && p[1] >= 0 && p[2] >= 0 && p[0] < ext[0] && p[1] < ext[1] && p[2] < ext[2];
  };
  for (int l = 1; l < cc.count; ++l) {
    const std::vector<int> dist = detail::cavity_distance(dom, cc, l);
    auto xi = [&](const Int3& P) {
      int d = std::numeric_limits<int>::max();
      for (const auto& v : adjacent_voxels(P))
        if (dom.in_box(v)) d = std::min(d, dist[dom.flat(v)]);
      return detail::collar_ramp(d, opt.collar);
    };
    for (int j = 0; j < family_size(fam); ++j) {
      MultiplierField m;
      m.which = BasisKind::dirichlet;
      m.index = l;
      m.factor = j;
      m.family = fam;
      m.raw = Vector::Zero(H1.size());
      // formal A0 on every H1 position of the doubled grid
      for (int r = 0; r < op.nout; ++r) {
        const Int3 par = H1.parity[size_t(r)];
        for (int x = par[0]; x < ext[0]; x += 2)
          for (int y = par[1]; y < ext[1]; y += 2)
            for (int z = par[2]; z < ext[2]; z += 2) {
              const Int3 P{x, y, z};
              double f = 0;
              for (const auto& t : op.rows[size_t(r)]) {
                const Int3 Q = P + t.shift;
                if (!in_grid(Q)) continue;
                const double w = xi(Q);
                if (w != 0.0) f += double(t.coef) * w * multiplier_value(fam, j, t.comp, detail::physical(Q));
              }
              f /= double(op.denom);
              const int i = H1.find(r, P);
              if (i >= 0) m.raw[i] = f;
              else if (std::abs(f) > 1e-12)
                throw GeometryError("collar of cavity " + std::to_string(l) +
                                    " reaches the boundary; refine the domain or shrink the collar");
            }
      }
      m.kernel_A1_residual = (A1 * m.raw).norm() / std::max(1e-300, m.raw.norm());
      m.projected = H0.size() > 0 ? ps.project(m.raw) : m.raw;
      b.fields.push_back(m.projected);
      b.multipliers.push_back(std::move(m));
    }
  }
  const SparseMatrix A0s = SparseMatrix(SparseMatrix(A0.transpose()) * l1);
  b.membership_residual = std::max(detail::max_col_residual(A1, b.fields), detail::max_col_residual(A0s, b.fields));
  b.orthogonality_residual = detail::max_col_residual(A0s, b.fields);
  detail::finish_set(b, l1);
  if (opt.compute_kernel_basis) {
    const SparseMatrix H = SparseMatrix(SparseMatrix(A1.transpose()) * A1) + SparseMatrix(SparseMatrix(A0s.transpose()) * A0s);
    b.kernel_basis = psd_kernel_basis(H, b.verified_dim, 7, &b.kernel_residual);
  }
  if (b.fields.empty()) b.notes.push_back("no dirichlet fields: the complement is connected");
  return b;
}

inline BasisSet neumann_basis(const VoxelDomain& dom, const TensorComplex& tc, const BasisOptions& opt = {},
                              std::optional<int> known_dim = std::nullopt) {
  BasisSet b;
  b.kind = tc.kind;
  b.which = BasisKind::neumann;
  const int k = kind_multiplicity(tc.kind);
  const int p = betti_numbers(build_complex(dom))[1];
  b.expected_count = k * p;
  b.verified_dim = known_dim ? *known_dim : int(tensor_cohomology(tc).dim_K2);
  const auto& L = tc.lattice;
  const LatticeSpace& H2 = L.space[2];
  const LatticeSpace& H3 = L.space[3];
  b.layout = grid_field(H2, Vector::Zero(H2.size()));

  const SparseMatrix A1 = tc.triple.A[1].to_real(1.0 / double(tc.triple.denom[1]));
  const SparseMatrix A2 = tc.triple.A[2].to_real(1.0 / double(tc.triple.denom[2]));
  const SparseMatrix l2 = tc.triple.lambda2.to_real();
  const SparseMatrix l2i = detail::metric_inverse(tc.triple.lambda2);
  const SparseMatrix A1s = SparseMatrix(SparseMatrix(A1.transpose()) * l2);  // l1 A1* (same kernel)
  const SparseMatrix A2s = SparseMatrix(l2i * SparseMatrix(A2.transpose()));  // A2*

  if (p > 0) {
    const AngleFunctions af = angle_functions(dom);
    const MultiplierFamily fam = multiplier_family(tc.kind, BasisKind::neumann);
    const IntMatrix A2t = tc.triple.A[2].transpose();  // H2 rows x H3 columns
    const double sgn = detail::kind_sign(tc.kind);
    const double den = double(tc.triple.denom[2]);

    // projection onto ker A2 inside ker A1*: subtract A2* psi
    const SparseMatrix S = SparseMatrix(A2 * A2s);
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-14);
    cg.setMaxIterations(std::max<Index>(1000, 20 * S.rows()));
    cg.compute(S);

    for (int j = 0; j < p; ++j) {
      std::vector<double> angle(size_t(H3.size()));
      for (int q = 0; q < H3.size(); ++q) angle[size_t(q)] = detail::cell_angle(af, j, H3.pos[size_t(q)]);
      for (int kk = 0; kk < family_size(fam); ++kk) {
        MultiplierField m;
        m.which = BasisKind::neumann;
        m.index = j + 1;
        m.factor = kk;
        m.family = fam;
        Vector u = Vector::Zero(H2.size());
        for (int r = 0; r < H2.size(); ++r) {
          const int beg = A2t.ptr[size_t(r)], end = A2t.ptr[size_t(r) + 1];
          if (beg == end) continue;
          const double ref = angle[size_t(A2t.idx[size_t(beg)])];
          double v = 0;
          for (int t = beg; t < end; ++t) {
            const int q = A2t.idx[size_t(t)];
            const double s = angle[size_t(q)] - std::round(angle[size_t(q)] - ref);
            v += double(A2t.val[size_t(t)]) * detail::smooth_step(s) *
                 multiplier_value(fam, kk, H3.comp[size_t(q)], detail::physical(H3.pos[size_t(q)]));
          }
          u[r] = v / den;
        }
        m.raw = sgn * (l2i * u);
        m.kernel_A1_residual = (A1s * m.raw).norm() / std::max(1e-300, m.raw.norm());
        const Vector rhs = A2 * m.raw;
        const Vector psi = cg.solve(rhs);
        m.projected = m.raw - A2s * psi;
        b.fields.push_back(m.projected);
        b.multipliers.push_back(std::move(m));
      }
    }
    const auto loops = deep_lattice_loops(af, tc.kind);
    FunctionalMatrix fm = lattice_functional_matrix(tc, b.fields, loops);
    std::vector<Vector> raw;
    for (const auto& m : b.multipliers) raw.push_back(m.raw);
    b.projection_functional_gap = (lattice_functional_matrix(tc, raw, loops).values - fm.values).cwiseAbs().maxCoeff();
    b.expected_functionals = expected_functional_matrix(tc.kind, fm.anchors);
    b.functional_error = (fm.values - b.expected_functionals).cwiseAbs().maxCoeff();
    b.functionals = fm;
  }
  b.membership_residual = std::max(detail::max_col_residual(A2, b.fields), detail::max_col_residual(A1s, b.fields));
  b.orthogonality_residual = detail::max_col_residual(A2, b.fields);
  detail::finish_set(b, l2);
  if (opt.compute_kernel_basis) {
    const SparseMatrix H = SparseMatrix(SparseMatrix(A2.transpose()) * A2) + SparseMatrix(SparseMatrix(A1s.transpose()) * A1s);
    b.kernel_basis = psd_kernel_basis(H, b.verified_dim, 7, &b.kernel_residual);
  }
  if (b.fields.empty()) b.notes.push_back("no neumann fields: the domain has no handles");
  return b;
}

inline BasisSet build_basis(const VoxelDomain& dom, ComplexKind kind, BasisKind which, const BasisOptions& opt = {},
                            const LatticeOptions& lopt = {}) {
  if (kind == ComplexKind::derham) return detail::derham_basis(dom, which);
  const TensorComplex tc = build_tensor_complex(dom, kind, 1.0, lopt);
  return which == BasisKind::dirichlet ? dirichlet_basis(dom, tc, opt) : neumann_basis(dom, tc, opt);
}

inline BasisSet dirichlet_basis(const VoxelDomain& dom, ComplexKind kind, const BasisOptions& opt = {}) {
  return build_basis(dom, kind, BasisKind::dirichlet, opt);
}

inline BasisSet neumann_basis(const VoxelDomain& dom, ComplexKind kind, const BasisOptions& opt = {}) {
  return build_basis(dom, kind, BasisKind::neumann, opt);
}

// ---------------------------------------------------------------------------
// Checks

inline bool independence_check(const BasisSet& b, const RankTolerance& tol = {}) {
  if (b.count() == 0) return true;
  const RankReport r = rank_report(RealMatrix(b.gram), tol);
  if (r.rank != b.count()) return false;
  if (b.functionals) {
    const Eigen::MatrixXd& v = b.functionals->values;
    if (v.rows() != v.cols()) return false;
    const Vector s = singular_values(RealMatrix(DenseMatrix(v)));
    if (s.size() == 0 || s.minCoeff() <= 1e-8 * std::max(1.0, s.maxCoeff())) return false;
  }
  return true;
}

struct SpanComparison {
  bool equal = false;
  double constructed_outside = 0;  // worst residual of constructed fields against the kernel basis
  double kernel_outside = 0;       // and the other way round
};

inline SpanComparison compare_spans(const std::vector<Vector>& fields, const DenseMatrix& kernel, double tol) {
  SpanComparison c;
  if (fields.empty() || kernel.cols() == 0) {
    c.equal = fields.empty() && kernel.cols() == 0;
    return c;
  }
  DenseMatrix F(fields[0].size(), Index(fields.size()));
  for (size_t i = 0; i < fields.size(); ++i) F.col(Index(i)) = fields[i] / fields[i].norm();
  const DenseMatrix Qf = detail::orthonormalize(F);
  const DenseMatrix Qk = detail::orthonormalize(kernel);
  c.constructed_outside = (F - Qk * (Qk.transpose() * F)).colwise().norm().maxCoeff();
  c.kernel_outside = (Qk - Qf * (Qf.transpose() * Qk)).colwise().norm().maxCoeff();
  c.equal = Index(fields.size()) == kernel.cols() && c.constructed_outside <= tol && c.kernel_outside <= tol;
  return c;
}

inline bool span_equality_check(const BasisSet& b, const DenseMatrix& kernel, double tol = 1e-6) {
  return compare_spans(b.fields, kernel, tol).equal;
}

inline bool span_equality_check(const BasisSet& b, double tol = 1e-6) { return span_equality_check(b, b.kernel_basis, tol); }

}  // namespace fredholm
