#pragma once

// Abstract Hilbert complexes A0: H0 -> H1, A1: H1 -> H2, A2: H2 -> H3, the
// block operator D = [[A2, 0], [A1*, A0]] and its cohomology bookkeeping.

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "exact.hpp"
#include "numerics.hpp"

namespace fredholm {

struct OperatorTriple {
  RealMatrix A0, A1, A2;
  std::string label;

  std::array<Index, 4> dims() const { return {A0.cols(), A0.rows(), A1.rows(), A2.rows()}; }

  void check_shapes() const {
    if (A1.cols() != A0.rows() || A2.cols() != A1.rows())
      throw InputError("operator triple shapes do not chain: " + label);
  }
};

// Inner products on H1, H2; H0 and H3 carry the Euclidean one.
struct WeightSpec {
  RealMatrix lambda1, lambda2;

  static WeightSpec identity(Index d1, Index d2) {
    return {RealMatrix(sparse_identity(d1)), RealMatrix(sparse_identity(d2))};
  }

  void validate(Index d1, Index d2) const {
    check_spd(lambda1, d1, "lambda1");
    check_spd(lambda2, d2, "lambda2");
  }

 private:
  static void check_spd(const RealMatrix& m, Index d, const char* name) {
    if (m.rows() != d || m.cols() != d) throw InputError(std::string(name) + " has the wrong size");
    if (d == 0) return;
    SparseMatrix s = m.to_sparse();
    SparseMatrix asym = s - SparseMatrix(s.transpose());
    if (asym.norm() > 1e-12 * std::max(1.0, s.norm())) throw InputError(std::string(name) + " is not symmetric");
    Eigen::SimplicialLLT<SparseMatrix> llt(s);
    if (llt.info() != Eigen::Success) throw InputError(std::string(name) + " is not positive definite");
  }
};

struct ComplexCheck {
  bool ok = false;
  double residual10 = 0.0;  // |A1 A0|
  double residual21 = 0.0;  // |A2 A1|
};

inline ComplexCheck verify_complex(const OperatorTriple& t, double rel = 1e-10) {
  t.check_shapes();
  SparseMatrix a0 = t.A0.to_sparse(), a1 = t.A1.to_sparse(), a2 = t.A2.to_sparse();
  ComplexCheck c;
  c.residual10 = product_norm(a1, a0);
  c.residual21 = product_norm(a2, a1);
  // relative to the operator norms, with a unit floor
  const double s10 = std::max(1.0, sparse_norm(a1) * sparse_norm(a0));
  const double s21 = std::max(1.0, sparse_norm(a2) * sparse_norm(a1));
  c.ok = c.residual10 <= rel * s10 && c.residual21 <= rel * s21;
  return c;
}

struct CohomologyReport {
  Index dim_N0 = 0, dim_K1 = 0, dim_K2 = 0, dim_N2star = 0;
  long long index_D = 0, index_Dstar = 0;
  std::optional<double> poincare_constant;
  std::vector<std::string> spectral_gap_flags;
  std::array<Index, 4> dims{};
  std::array<Index, 3> ranks{};
  std::string method;

  void finalize() {
    index_D = (long long)dim_N0 - (long long)dim_K1 + (long long)dim_K2 - (long long)dim_N2star;
    index_Dstar = -index_D;
  }
};

namespace detail {

inline SparseMatrix weighted_transpose_right(const SparseMatrix& a, const SparseMatrix& lam) {
  return SparseMatrix(a.transpose()) * lam;  // A^T lambda
}

inline void note_gap(CohomologyReport& rep, const char* what, const RankReport& r) {
  if (r.ambiguous) {
    rep.spectral_gap_flags.push_back(std::string("rank-ambiguous:") + what + " rank=" + std::to_string(r.rank) +
                                     " kept=" + std::to_string(r.smallest_kept) +
                                     " dropped=" + std::to_string(r.largest_dropped));
  }
}

}  // namespace detail

// Floating-point route; dims and indices come out of rank decisions.
inline CohomologyReport cohomology(const OperatorTriple& t, const std::optional<WeightSpec>& w = std::nullopt,
                                   const RankTolerance& tol = {}) {
  t.check_shapes();
  const auto d = t.dims();
  WeightSpec ws = w ? *w : WeightSpec::identity(d[1], d[2]);
  ws.validate(d[1], d[2]);
  SparseMatrix a0 = t.A0.to_sparse(), a1 = t.A1.to_sparse(), a2 = t.A2.to_sparse();
  SparseMatrix l1 = ws.lambda1.to_sparse(), l2 = ws.lambda2.to_sparse();

  CohomologyReport rep;
  rep.dims = d;
  rep.method = "floating";
  RankReport r0 = rank_report(RealMatrix(a0), tol);
  RankReport r1 = rank_report(RealMatrix(a1), tol);
  RankReport r2 = rank_report(RealMatrix(a2), tol);
  RankReport s1 = rank_report(RealMatrix(vstack(a1, detail::weighted_transpose_right(a0, l1))), tol);
  RankReport s2 = rank_report(RealMatrix(vstack(a2, detail::weighted_transpose_right(a1, l2))), tol);
  detail::note_gap(rep, "A0", r0);
  detail::note_gap(rep, "A1", r1);
  detail::note_gap(rep, "A2", r2);
  detail::note_gap(rep, "[A1;A0*]", s1);
  detail::note_gap(rep, "[A2;A1*]", s2);
  rep.ranks = {r0.rank, r1.rank, r2.rank};
  rep.dim_N0 = d[0] - r0.rank;
  rep.dim_K1 = d[1] - s1.rank;
  rep.dim_K2 = d[2] - s2.rank;
  rep.dim_N2star = d[3] - r2.rank;
  rep.finalize();
  return rep;
}

// Integer triple with integer metrics: the exact route.
struct IntTriple {
  std::array<IntMatrix, 3> A;
  std::array<long long, 3> denom{1, 1, 1};
  IntMatrix lambda1, lambda2;  // empty (0x0) means identity
  std::string label;

  std::array<Index, 4> dims() const { return {A[0].cols, A[0].rows, A[1].rows, A[2].rows}; }

  OperatorTriple real() const {
    return {RealMatrix(A[0].to_real(1.0 / double(denom[0]))), RealMatrix(A[1].to_real(1.0 / double(denom[1]))),
            RealMatrix(A[2].to_real(1.0 / double(denom[2]))), label};
  }

  WeightSpec weights() const {
    const auto d = dims();
    WeightSpec w = WeightSpec::identity(d[1], d[2]);
    if (lambda1.rows) w.lambda1 = RealMatrix(lambda1.to_real());
    if (lambda2.rows) w.lambda2 = RealMatrix(lambda2.to_real());
    return w;
  }

  bool complex_property() const { return (A[1] * A[0]).is_zero() && (A[2] * A[1]).is_zero(); }
};

inline CohomologyReport exact_cohomology(const IntTriple& t) {
  const auto d = t.dims();
  if (t.A[1].cols != t.A[0].rows || t.A[2].cols != t.A[1].rows) throw InputError("integer triple shapes do not chain");
  if (!t.complex_property()) throw InvariantViolation("complex property fails for " + t.label);
  CohomologyReport rep;
  rep.dims = d;
  rep.method = "exact-modular";
  const int r0 = exact_rank(t.A[0]);
  const int r1 = exact_rank(t.A[1]);
  const int r2 = exact_rank(t.A[2]);
  IntMatrix a0t = t.A[0].transpose(), a1t = t.A[1].transpose();
  if (t.lambda1.rows) a0t = a0t * t.lambda1;
  if (t.lambda2.rows) a1t = a1t * t.lambda2;
  const int s1 = exact_rank(vstack(t.A[1], a0t));
  const int s2 = exact_rank(vstack(t.A[2], a1t));
  rep.ranks = {r0, r1, r2};
  rep.dim_N0 = d[0] - r0;
  rep.dim_K1 = d[1] - s1;
  rep.dim_K2 = d[2] - s2;
  rep.dim_N2star = d[3] - r2;
  rep.finalize();
  // on a complex the stacked ranks split as rank A1 + rank A0
  if (s1 != r1 + r0 || s2 != r2 + r1) throw InvariantViolation("stacked rank does not split for " + t.label);
  return rep;
}

struct DiracBlockOperator {
  RealMatrix matrix;     // (d3+d1) x (d2+d0)
  RealMatrix adjoint;    // (d2+d0) x (d3+d1)
  RealMatrix in_metric;  // diag(lambda2, I) on H2 x H0
  RealMatrix out_metric; // diag(I, lambda1) on H3 x H1
  std::array<Index, 4> dims{};
};

namespace detail {

inline SparseMatrix block2x2(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c,
                             const SparseMatrix& d) {
  return vstack(hstack(a, b), hstack(c, d));
}

inline SparseMatrix block_diag(const SparseMatrix& a, const SparseMatrix& b) {
  return block2x2(a, SparseMatrix(a.rows(), b.cols()), SparseMatrix(b.rows(), a.cols()), b);
}

inline SparseMatrix spd_inverse(const SparseMatrix& lam) {
  const Index n = lam.rows();
  if (n == 0) return SparseMatrix(0, 0);
  if (lam.nonZeros() == n) {
    bool diag = true;
    for (Index k = 0; k < lam.outerSize() && diag; ++k)
      for (SparseMatrix::InnerIterator it(lam, k); it; ++it)
        if (it.row() != it.col()) diag = false;
    if (diag) {
      SparseMatrix inv(n, n);
      std::vector<Triplet> t;
      for (Index i = 0; i < n; ++i) t.emplace_back(i, i, 1.0 / lam.coeff(i, i));
      inv.setFromTriplets(t.begin(), t.end());
      return inv;
    }
  }
  Eigen::SimplicialLLT<SparseMatrix> llt(lam);
  DenseMatrix inv = llt.solve(DenseMatrix::Identity(n, n));
  SparseMatrix s = inv.sparseView(0.0, 0.0);
  return s;
}

}  // namespace detail

// Adjoints under the weights: A0* = A0^T l1, A1* = l1^-1 A1^T l2, A2* = l2^-1 A2^T.
struct Adjoints {
  SparseMatrix A0s, A1s, A2s;
};

inline Adjoints weighted_adjoints(const OperatorTriple& t, const WeightSpec& w) {
  SparseMatrix a0 = t.A0.to_sparse(), a1 = t.A1.to_sparse(), a2 = t.A2.to_sparse();
  SparseMatrix l1 = w.lambda1.to_sparse(), l2 = w.lambda2.to_sparse();
  SparseMatrix l1i = detail::spd_inverse(l1), l2i = detail::spd_inverse(l2);
  return {SparseMatrix(SparseMatrix(a0.transpose()) * l1), SparseMatrix(l1i * SparseMatrix(a1.transpose()) * l2),
          SparseMatrix(l2i * SparseMatrix(a2.transpose()))};
}

inline DiracBlockOperator build_dirac(const OperatorTriple& t, const std::optional<WeightSpec>& w = std::nullopt) {
  t.check_shapes();
  const auto d = t.dims();
  WeightSpec ws = w ? *w : WeightSpec::identity(d[1], d[2]);
  ws.validate(d[1], d[2]);
  SparseMatrix a0 = t.A0.to_sparse(), a2 = t.A2.to_sparse(), a1 = t.A1.to_sparse();
  Adjoints s = weighted_adjoints(t, ws);
  DiracBlockOperator op;
  op.dims = d;
  op.matrix = RealMatrix(detail::block2x2(a2, SparseMatrix(d[3], d[0]), s.A1s, a0));
  op.adjoint = RealMatrix(detail::block2x2(s.A2s, a1, SparseMatrix(d[0], d[3]), s.A0s));
  op.in_metric = RealMatrix(detail::block_diag(ws.lambda2.to_sparse(), sparse_identity(d[0])));
  op.out_metric = RealMatrix(detail::block_diag(sparse_identity(d[3]), ws.lambda1.to_sparse()));
  return op;
}

namespace detail {

// Lower Cholesky factor L of an SPD matrix, dense.
inline DenseMatrix chol_lower(const RealMatrix& m) {
  DenseMatrix a = m.to_dense();
  if (a.rows() == 0) return a;
  Eigen::LLT<DenseMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw InputError("metric is not positive definite");
  return llt.matrixL();
}

}  // namespace detail

// D in orthonormal coordinates: L_out^T D L_in^-T, so Euclidean SVD = weighted SVD.
inline DenseMatrix metric_form(const RealMatrix& op, const RealMatrix& in_metric, const RealMatrix& out_metric) {
  DenseMatrix lo = detail::chol_lower(out_metric), li = detail::chol_lower(in_metric);
  DenseMatrix m = lo.transpose() * op.to_dense();
  if (li.rows() == 0) return m;
  // m * L_in^-T
  DenseMatrix r = li.triangularView<Eigen::Lower>().solve(m.transpose()).transpose();
  return r;
}

struct DiracKernel {
  DenseMatrix basis;        // columns in (H2 | H0) block coordinates
  DenseMatrix adjoint_basis; // columns in (H3 | H1)
  Index dim = 0, dim_adjoint = 0;
  bool verified = false;
};

inline DiracKernel kernel_of_dirac(const DiracBlockOperator& d, const CohomologyReport& rep,
                                   const RankTolerance& tol = {}) {
  DiracKernel k;
  k.basis = nullspace_basis(d.matrix, tol);
  k.adjoint_basis = nullspace_basis(d.adjoint, tol);
  k.dim = k.basis.cols();
  k.dim_adjoint = k.adjoint_basis.cols();
  k.verified = k.dim == rep.dim_K2 + rep.dim_N0 && k.dim_adjoint == rep.dim_N2star + rep.dim_K1;
  if (!k.verified)
    throw InvariantViolation("dim ker D = " + std::to_string(k.dim) + ", expected " +
                             std::to_string(rep.dim_K2 + rep.dim_N0));
  return k;
}

// Index computed from the block operator alone.
inline long long dirac_index(const DiracBlockOperator& d, const RankTolerance& tol = {}) {
  const Index rk = numerical_rank(d.matrix, tol);
  const Index rka = numerical_rank(d.adjoint, tol);
  if (rk != rka) throw InvariantViolation("rank D differs from rank D*");
  return (long long)(d.matrix.cols() - rk) - (long long)(d.adjoint.cols() - rka);
}

struct HelmholtzParts {
  Vector ran_A2star, k2, ran_A1;
};

// x = A2* a + h + A1 b with the three parts orthogonal in the lambda2 product.
inline HelmholtzParts helmholtz_decompose(const OperatorTriple& t, const std::optional<WeightSpec>& w,
                                          const Vector& x, const RankTolerance& tol = {}) {
  t.check_shapes();
  const auto d = t.dims();
  if (x.size() != d[2]) throw InputError("helmholtz_decompose: x has the wrong length");
  WeightSpec ws = w ? *w : WeightSpec::identity(d[1], d[2]);
  ws.validate(d[1], d[2]);
  DenseMatrix l = detail::chol_lower(ws.lambda2);
  // hat coordinates: xh = L^T x; ran A1 -> L^T A1, ran A2* -> L^-1 A2^T
  DenseMatrix a1h = l.transpose() * t.A1.to_dense();
  DenseMatrix a2h = l.triangularView<Eigen::Lower>().solve(DenseMatrix(t.A2.to_dense().transpose()));
  Vector xh = l.transpose() * x;
  auto p1 = least_squares_project(RealMatrix(a1h), xh, tol);
  auto p2 = least_squares_project(RealMatrix(a2h), xh, tol);
  Vector part1 = xh - p1.r, part2 = xh - p2.r;
  Vector rest = xh - part1 - part2;
  auto back = [&](const Vector& v) -> Vector { return l.transpose().triangularView<Eigen::Upper>().solve(v); };
  return {back(part2), back(rest), back(part1)};
}

struct PoincareConstant {
  double c = 0.0;
  double c_adjoint = 0.0;
  double worst_ratio = 0.0;  // max |z| / (c |Dz|) over the samples
  bool certified = false;
};

inline PoincareConstant poincare_constant(const DiracBlockOperator& d, const RankTolerance& tol = {},
                                          int samples = 50, unsigned seed = 1) {
  DenseMatrix m = metric_form(d.matrix, d.in_metric, d.out_metric);
  DenseMatrix ma = metric_form(d.adjoint, d.out_metric, d.in_metric);
  PoincareConstant pc;
  pc.c = 1.0 / smallest_positive_singular_value(RealMatrix(m), tol);
  pc.c_adjoint = 1.0 / smallest_positive_singular_value(RealMatrix(ma), tol);
  auto svd = detail::lapack_svd(m, true);
  const Index r = rank_from_values(svd.s, tol).rank;
  DenseMatrix row_space = svd.V.leftCols(r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int s = 0; s < samples; ++s) {
    Vector g(r);
    for (Index i = 0; i < r; ++i) g[i] = nd(rng);
    Vector z = row_space * g;
    const double ratio = z.norm() / (pc.c * (m * z).norm());
    pc.worst_ratio = std::max(pc.worst_ratio, ratio);
  }
  pc.certified = pc.worst_ratio <= 1.0 + 1e-9;
  return pc;
}

// (A0, l2^-1 A1, A2 l2); the complex property survives exactly since l2 l2^-1 = I.
struct WeightedTriple {
  OperatorTriple triple;
  WeightSpec weights;
};

inline WeightedTriple apply_weights(const OperatorTriple& t, const WeightSpec& w) {
  t.check_shapes();
  const auto d = t.dims();
  w.validate(d[1], d[2]);
  SparseMatrix l2 = w.lambda2.to_sparse();
  SparseMatrix l2i = detail::spd_inverse(l2);
  OperatorTriple out{t.A0, RealMatrix(SparseMatrix(l2i * t.A1.to_sparse())),
                     RealMatrix(SparseMatrix(t.A2.to_sparse() * l2)), t.label + "~"};
  return {out, w};
}

// The dual complex (A2*, A1*, A0*) with swapped weights.
inline WeightedTriple dual_complex(const OperatorTriple& t, const std::optional<WeightSpec>& w = std::nullopt) {
  const auto d = t.dims();
  WeightSpec ws = w ? *w : WeightSpec::identity(d[1], d[2]);
  Adjoints s = weighted_adjoints(t, ws);
  return {OperatorTriple{RealMatrix(s.A2s), RealMatrix(s.A1s), RealMatrix(s.A0s), t.label + "^d"},
          WeightSpec{ws.lambda2, ws.lambda1}};
}

// nullopt when N2* is not a multiple of n.
inline std::optional<bool> general_index_relation(const CohomologyReport& r, long long n, long long m, long long p) {
  if (n <= 0 || r.dim_N2star % n != 0) return std::nullopt;
  const long long k = r.dim_N2star / n;
  return r.dim_K1 == k * (m - 1) && r.dim_K2 == k * p && r.index_D == k * (p - m - n + 1);
}

struct RandomComplexOptions {
  Index max_dim = 12;
};

// A1 = R (I - P_ranA0) annihilates ran A0; A2 likewise kills ran A1.
inline OperatorTriple random_complex(std::mt19937_64& rng, const RandomComplexOptions& opt = {}) {
  std::uniform_int_distribution<Index> dimd(0, opt.max_dim);
  std::normal_distribution<double> nd;
  std::array<Index, 4> d{};
  for (auto& x : d) x = dimd(rng);
  auto low_rank = [&](Index r, Index c) -> DenseMatrix {
    const Index mx = std::min(r, c);
    std::uniform_int_distribution<Index> rk(0, mx);
    const Index k = rk(rng);
    DenseMatrix b(r, k), cc(k, c);
    for (Index i = 0; i < b.size(); ++i) b.data()[i] = nd(rng);
    for (Index i = 0; i < cc.size(); ++i) cc.data()[i] = nd(rng);
    return b * cc;
  };
  auto annihilator = [&](const DenseMatrix& a) -> DenseMatrix {
    // I - A A^+ via the thin SVD
    const Index n = a.rows();
    DenseMatrix p = DenseMatrix::Identity(n, n);
    if (a.cols() == 0 || n == 0) return p;
    auto svd = detail::lapack_svd(a, true);
    const Index r = rank_from_values(svd.s, RankTolerance{}).rank;
    DenseMatrix u = svd.U.leftCols(r);
    return p - u * u.transpose();
  };
  DenseMatrix a0 = low_rank(d[1], d[0]);
  DenseMatrix a1 = low_rank(d[2], d[1]) * annihilator(a0);
  DenseMatrix a2 = low_rank(d[3], d[2]) * annihilator(a1);
  return {RealMatrix(a0), RealMatrix(a1), RealMatrix(a2), "random"};
}

inline DenseMatrix random_spd(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> nd;
  DenseMatrix l(n, n);
  for (Index i = 0; i < l.size(); ++i) l.data()[i] = nd(rng);
  return l * l.transpose() + DenseMatrix::Identity(n, n);
}

struct BatteryRecord {
  std::array<Index, 4> dims{};
  CohomologyReport report;
  long long index_from_operator = 0;  // dim ker D - dim ker D*
  bool index_ok = false, dual_ok = false, weight_ok = false;
};

struct BatteryResult {
  unsigned long long seed = 0;
  int count = 0;
  Index max_dim = 0;
  int index_passed = 0, dual_passed = 0, weight_passed = 0;
  std::vector<BatteryRecord> records;
  int failures() const {
    int f = 0;
    for (const auto& r : records) f += (r.index_ok && r.dual_ok && r.weight_ok) ? 0 : 1;
    return f;
  }
};

// Index identity, duality and weight invariance over seeded random complexes.
inline BatteryResult random_complex_battery(unsigned long long seed, int count, Index max_dim = 12,
                                            const RankTolerance& tol = {}) {
  if (count < 0) throw InputError("random-complex: count must be nonnegative");
  if (max_dim < 0) throw InputError("random-complex: max-dim must be nonnegative");
  BatteryResult res;
  res.seed = seed;
  res.count = count;
  res.max_dim = max_dim;
  std::mt19937_64 rng(seed);
  for (int c = 0; c < count; ++c) {
    const OperatorTriple t = random_complex(rng, {max_dim});
    BatteryRecord r;
    r.dims = t.dims();
    r.report = cohomology(t, std::nullopt, tol);
    const DiracBlockOperator d = build_dirac(t);
    const Index rk = numerical_rank(d.matrix, tol), rka = numerical_rank(d.adjoint, tol);
    const long long ker = (long long)(d.matrix.cols() - rk), kera = (long long)(d.adjoint.cols() - rka);
    r.index_from_operator = ker - kera;
    r.index_ok = r.index_from_operator == r.report.index_D && r.report.index_Dstar == -r.report.index_D &&
                 kera - ker == r.report.index_Dstar;

    const WeightedTriple dual = dual_complex(t);
    const CohomologyReport rd = cohomology(dual.triple, dual.weights, tol);
    r.dual_ok = rd.dim_N0 == r.report.dim_N2star && rd.dim_K1 == r.report.dim_K2 && rd.dim_K2 == r.report.dim_K1 &&
                rd.dim_N2star == r.report.dim_N0 && rd.index_D == -r.report.index_D;

    WeightSpec w{RealMatrix(random_spd(rng, r.dims[1])), RealMatrix(random_spd(rng, r.dims[2]))};
    const CohomologyReport rw = cohomology(t, w, tol);
    r.weight_ok = rw.dim_N0 == r.report.dim_N0 && rw.dim_K1 == r.report.dim_K1 && rw.dim_K2 == r.report.dim_K2 &&
                  rw.dim_N2star == r.report.dim_N2star;

    res.index_passed += r.index_ok;
    res.dual_passed += r.dual_ok;
    res.weight_passed += r.weight_ok;
    res.records.push_back(r);
  }
  return res;
}

}  // namespace fredholm
