#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace fredholm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// sigma counts toward the rank iff sigma > max(relative * sigma_max, absolute)
struct RankTolerance {
  double relative = 1e-9;
  double absolute = 1e-12;

  void validate() const {
    if (!(relative > 0.0 && relative < 1.0)) throw InputError("relative rank threshold must lie in (0,1)");
    if (!(absolute >= 0.0)) throw InputError("absolute rank floor must be nonnegative");
  }
  double threshold(double sigma_max) const { return std::max(relative * sigma_max, absolute); }
};

// Matrices beyond this minimum dimension leave the dense SVD path.
inline constexpr Index kDenseLimit = 2000;

class RealMatrix {
 public:
  enum class Storage { dense, sparse };

  RealMatrix() : data_(DenseMatrix(0, 0)) {}
  RealMatrix(DenseMatrix m) : data_(std::move(m)) {}
  RealMatrix(SparseMatrix m) : data_(std::move(m)) { std::get<SparseMatrix>(data_).makeCompressed(); }

  static RealMatrix zeros(Index r, Index c, Storage s = Storage::sparse) {
    if (s == Storage::dense) return RealMatrix(DenseMatrix::Zero(r, c));
    return RealMatrix(SparseMatrix(r, c));
  }

  Storage storage() const { return std::holds_alternative<DenseMatrix>(data_) ? Storage::dense : Storage::sparse; }
  Index rows() const { return std::visit([](const auto& m) { return Index(m.rows()); }, data_); }
  Index cols() const { return std::visit([](const auto& m) { return Index(m.cols()); }, data_); }

  DenseMatrix to_dense() const {
    if (storage() == Storage::dense) return std::get<DenseMatrix>(data_);
    return DenseMatrix(std::get<SparseMatrix>(data_));
  }
  SparseMatrix to_sparse() const {
    if (storage() == Storage::sparse) return std::get<SparseMatrix>(data_);
    SparseMatrix s = std::get<DenseMatrix>(data_).sparseView(0.0, 0.0);
    s.makeCompressed();
    return s;
  }
  const SparseMatrix* sparse_ptr() const { return std::get_if<SparseMatrix>(&data_); }
  const DenseMatrix* dense_ptr() const { return std::get_if<DenseMatrix>(&data_); }

  double operator()(Index i, Index j) const {
    if (auto d = dense_ptr()) return (*d)(i, j);
    return sparse_ptr()->coeff(i, j);
  }

  RealMatrix transpose() const {
    if (auto d = dense_ptr()) return RealMatrix(DenseMatrix(d->transpose()));
    return RealMatrix(SparseMatrix(sparse_ptr()->transpose()));
  }

  Vector apply(const Vector& x) const {
    if (x.size() != cols()) throw InputError("matrix-vector size mismatch");
    if (auto d = dense_ptr()) return (*d) * x;
    return (*sparse_ptr()) * x;
  }

  double frobenius() const {
    return std::visit([](const auto& m) { return m.size() ? double(m.norm()) : 0.0; }, data_);
  }

  bool all_finite() const {
    if (auto d = dense_ptr()) return d->allFinite();
    const auto& s = *sparse_ptr();
    for (Index k = 0; k < s.nonZeros(); ++k)
      if (!std::isfinite(s.valuePtr()[k])) return false;
    return true;
  }

 private:
  std::variant<DenseMatrix, SparseMatrix> data_;
};

// Eigen asserts on reductions over empty sparse matrices.
inline double sparse_norm(const SparseMatrix& m) { return m.nonZeros() ? m.norm() : 0.0; }

inline SparseMatrix vstack(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.cols()) throw InputError("vstack: column count mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nonZeros() + b.nonZeros());
  for (Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < b.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(b, k); it; ++it) t.emplace_back(a.rows() + it.row(), it.col(), it.value());
  SparseMatrix s(a.rows() + b.rows(), a.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

inline SparseMatrix hstack(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows()) throw InputError("hstack: row count mismatch");
  return SparseMatrix(vstack(a.transpose(), b.transpose()).transpose());
}

inline SparseMatrix sparse_identity(Index n) {
  SparseMatrix s(n, n);
  s.setIdentity();
  return s;
}

namespace detail {

struct SvdResult {
  Vector s;
  DenseMatrix U;   // thin or full, columns = left singular vectors
  DenseMatrix V;   // full n x n when requested
};

// LAPACK divide-and-conquer SVD. want_vectors: thin U and full V.
inline SvdResult lapack_svd(DenseMatrix a, bool want_vectors) {
  const lapack_int m = lapack_int(a.rows()), n = lapack_int(a.cols());
  SvdResult r;
  const lapack_int k = std::min(m, n);
  r.s.resize(k);
  if (k == 0) {
    if (want_vectors) {
      r.U = DenseMatrix::Identity(m, m);
      r.V = DenseMatrix::Identity(n, n);
    }
    return r;
  }
  if (!want_vectors) {
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, r.s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw std::runtime_error("dgesdd failed, info=" + std::to_string(info));
    return r;
  }
  // full V is needed for nullspaces, hence 'A' when m < n
  const char job = (m >= n) ? 'S' : 'A';
  const lapack_int ucols = (job == 'S') ? n : m;
  r.U.resize(m, ucols);
  DenseMatrix vt(n, n);
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, job, m, n, a.data(), m, r.s.data(), r.U.data(), m,
                                   vt.data(), n);
  if (info != 0) throw std::runtime_error("dgesdd failed, info=" + std::to_string(info));
  r.V = vt.transpose();
  return r;
}

inline void check_finite(const RealMatrix& m) {
  if (!m.all_finite()) throw InputError("matrix has non-finite entries");
}

}  // namespace detail

inline Vector singular_values(const RealMatrix& m) {
  detail::check_finite(m);
  return detail::lapack_svd(m.to_dense(), false).s;
}

// Rank decision together with the evidence around the cut.
struct RankReport {
  Index rank = 0;
  double sigma_max = 0.0;
  double threshold = 0.0;
  double smallest_kept = 0.0;                                         // 0 when rank = 0
  double largest_dropped = 0.0;                                       // 0 when nothing dropped
  bool ambiguous = false;                                             // gap < 10x on either side of the cut
  std::string method = "dense-svd";

  double gap() const {
    if (rank == 0 || largest_dropped <= 0.0) return std::numeric_limits<double>::infinity();
    return smallest_kept / largest_dropped;
  }
};

inline RankReport rank_from_values(const Vector& s, const RankTolerance& tol) {
  RankReport r;
  if (s.size() == 0) return r;
  r.sigma_max = s.maxCoeff();
  r.threshold = tol.threshold(r.sigma_max);
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > r.threshold) {
      ++r.rank;
      r.smallest_kept = (r.rank == 1) ? s[i] : std::min(r.smallest_kept, s[i]);
    } else {
      r.largest_dropped = std::max(r.largest_dropped, s[i]);
    }
  }
  const bool kept_close = r.rank > 0 && r.smallest_kept < 10.0 * r.threshold;
  const bool dropped_close = r.largest_dropped > r.threshold / 10.0 && r.largest_dropped > 0.0;
  r.ambiguous = kept_close || dropped_close;
  return r;
}

namespace detail {

// Column-pivoted sparse QR rank for matrices too large for the dense path.
inline RankReport sparse_qr_rank(const SparseMatrix& a, const RankTolerance& tol) {
  RankReport r;
  r.method = "sparse-qr";
  if (a.rows() == 0 || a.cols() == 0) return r;
  // QR is run on the orientation with more rows than columns
  SparseMatrix m = a.rows() >= a.cols() ? a : SparseMatrix(a.transpose());
  m.makeCompressed();
  double colmax = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k) colmax = std::max(colmax, m.col(k).norm());
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(tol.threshold(colmax));
  qr.compute(m);
  if (qr.info() != Eigen::Success) throw std::runtime_error("sparse QR failed");
  r.rank = qr.rank();
  const auto& R = qr.matrixR();
  Vector diag = Vector::Zero(std::min(R.rows(), R.cols()));
  for (Index i = 0; i < diag.size(); ++i) diag[i] = std::abs(R.coeff(i, i));
  r.sigma_max = colmax;
  r.threshold = tol.threshold(colmax);
  r.smallest_kept = r.rank > 0 ? diag.head(r.rank).minCoeff() : 0.0;
  r.largest_dropped = r.rank < diag.size() ? diag.tail(diag.size() - r.rank).maxCoeff() : 0.0;
  r.ambiguous = (r.rank > 0 && r.smallest_kept < 10.0 * r.threshold) ||
                (r.largest_dropped > r.threshold / 10.0);
  return r;
}

}  // namespace detail

inline RankReport rank_report(const RealMatrix& m, const RankTolerance& tol = {}) {
  tol.validate();
  detail::check_finite(m);
  if (std::min(m.rows(), m.cols()) > kDenseLimit) return detail::sparse_qr_rank(m.to_sparse(), tol);
  return rank_from_values(detail::lapack_svd(m.to_dense(), false).s, tol);
}

inline Index numerical_rank(const RealMatrix& m, const RankTolerance& tol = {}) { return rank_report(m, tol).rank; }

namespace detail {

inline DenseMatrix orthonormalize(const DenseMatrix& x) {
  if (x.cols() == 0) return x;
  Eigen::HouseholderQR<DenseMatrix> qr(x);
  return qr.householderQ() * DenseMatrix::Identity(x.rows(), x.cols());
}

}  // namespace detail

// Kernel of a sparse symmetric positive semidefinite matrix via shift-invert
// subspace iteration; the expected dimension is supplied by an exact rank.
inline DenseMatrix psd_kernel_basis(const SparseMatrix& h, Index dim, unsigned seed = 7, double* residual = nullptr) {
  const Index n = h.rows();
  if (dim == 0 || n == 0) {
    if (residual) *residual = 0.0;
    return DenseMatrix(n, 0);
  }
  double scale = 0.0;
  for (Index k = 0; k < h.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (scale == 0.0) scale = 1.0;
  const double shift = 1e-9 * scale;
  SparseMatrix shifted = h + shift * sparse_identity(n);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("LDLT factorization failed");
  const Index block = std::min<Index>(n, dim + 4);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  DenseMatrix x(n, block);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  x = detail::orthonormalize(x);
  for (int it = 0; it < 6; ++it) x = detail::orthonormalize(ldlt.solve(x));
  // Rayleigh-Ritz on the block, keep the dim smallest Ritz vectors
  DenseMatrix hx = h * x;
  DenseMatrix small = x.transpose() * hx;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (small + small.transpose()));
  DenseMatrix basis = x * es.eigenvectors().leftCols(dim);
  basis = detail::orthonormalize(basis);
  if (residual) *residual = (h * basis).norm() / scale;
  return basis;
}

// Orthonormal basis of ker M (columns).
inline DenseMatrix nullspace_basis(const RealMatrix& m, const RankTolerance& tol = {}, RankReport* report = nullptr) {
  tol.validate();
  detail::check_finite(m);
  const Index n = m.cols();
  if (n == 0) return DenseMatrix(0, 0);
  if (m.rows() == 0) {
    if (report) *report = RankReport{};
    return DenseMatrix::Identity(n, n);
  }
  if (std::min(m.rows(), n) > kDenseLimit) {
    RankReport r = detail::sparse_qr_rank(m.to_sparse(), tol);
    if (report) *report = r;
    SparseMatrix s = m.to_sparse();
    SparseMatrix h = SparseMatrix(s.transpose()) * s;
    return psd_kernel_basis(h, n - r.rank);
  }
  auto svd = detail::lapack_svd(m.to_dense(), true);
  RankReport r = rank_from_values(svd.s, tol);
  if (report) *report = r;
  return svd.V.rightCols(n - r.rank);
}

inline DenseMatrix intersect_nullspaces(const RealMatrix& m1, const RealMatrix& m2, const RankTolerance& tol = {},
                                         RankReport* report = nullptr) {
  if (m1.cols() != m2.cols()) throw InputError("intersect_nullspaces: column-count mismatch");
  return nullspace_basis(RealMatrix(vstack(m1.to_sparse(), m2.to_sparse())), tol, report);
}

struct LeastSquaresResult {
  Vector x;
  Vector r;
};

// Minimum-norm minimizer of |Ax - b|; r = b - Ax is the part of b orthogonal to ran A.
inline LeastSquaresResult least_squares_project(const RealMatrix& a, const Vector& b, const RankTolerance& tol = {}) {
  tol.validate();
  if (a.rows() != b.size()) throw InputError("least_squares_project: size mismatch");
  detail::check_finite(a);
  LeastSquaresResult out;
  if (a.cols() == 0) {
    out.x = Vector(0);
    out.r = b;
    return out;
  }
  if (std::min(a.rows(), a.cols()) <= kDenseLimit) {
    auto svd = detail::lapack_svd(a.to_dense(), true);
    RankReport rr = rank_from_values(svd.s, tol);
    const Index k = rr.rank;
    Vector c = svd.U.leftCols(k).transpose() * b;
    for (Index i = 0; i < k; ++i) c[i] /= svd.s[i];
    out.x = svd.V.leftCols(k) * c;
  } else {
    SparseMatrix s = a.to_sparse();
    Eigen::LeastSquaresConjugateGradient<SparseMatrix> cg;
    cg.setTolerance(1e-14);
    cg.setMaxIterations(20 * s.cols());
    cg.compute(s);
    out.x = cg.solve(b);
  }
  out.r = b - a.apply(out.x);
  return out;
}

inline double smallest_positive_singular_value(const RealMatrix& m, const RankTolerance& tol = {}) {
  tol.validate();
  Vector s = singular_values(m);
  RankReport r = rank_from_values(s, tol);
  if (r.rank == 0) throw NoPositiveSingularValue();
  return r.smallest_kept;
}

// 2-norm of a sparse matrix product, used for composition residuals.
inline double product_norm(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix c = a * b;
  return c.nonZeros() ? c.norm() : 0.0;
}

}  // namespace fredholm
