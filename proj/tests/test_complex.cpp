#include <catch_amalgamated.hpp>

#include <random>

#include "fredholm/complex.hpp"
#include "fredholm/exact.hpp"

using namespace fredholm;
using Catch::Approx;

namespace {

DenseMatrix gaussian(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> nd;
  DenseMatrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

OperatorTriple zero_triple(Index d0, Index d1, Index d2, Index d3) {
  return {RealMatrix::zeros(d1, d0), RealMatrix::zeros(d2, d1), RealMatrix::zeros(d3, d2), "zero"};
}

}  // namespace

TEST_CASE("numerical rank of small matrices") {
  CHECK(numerical_rank(RealMatrix(DenseMatrix(DenseMatrix::Identity(3, 3)))) == 3);
  CHECK(numerical_rank(RealMatrix(DenseMatrix(DenseMatrix::Ones(2, 2)))) == 1);
  std::mt19937_64 rng(3);
  const DenseMatrix bc = gaussian(rng, 8, 3) * gaussian(rng, 3, 5);
  CHECK(numerical_rank(RealMatrix(bc)) == 3);
  CHECK(numerical_rank(RealMatrix(SparseMatrix(bc.sparseView()))) == 3);
}

TEST_CASE("rank tolerance is validated") {
  RankTolerance t;
  t.relative = 0;
  CHECK_THROWS_AS(numerical_rank(RealMatrix(DenseMatrix(DenseMatrix::Identity(2, 2))), t), InputError);
}

TEST_CASE("nullspace bases") {
  CHECK(nullspace_basis(RealMatrix(DenseMatrix(DenseMatrix::Zero(3, 3)))).cols() == 3);
  CHECK(nullspace_basis(RealMatrix(DenseMatrix(DenseMatrix::Identity(3, 3)))).cols() == 0);
  DenseMatrix m(2, 3);
  m << 1, 1, 0, 0, 0, 1;
  const DenseMatrix n = nullspace_basis(RealMatrix(m));
  REQUIRE(n.cols() == 1);
  CHECK(std::abs(n(0, 0) + n(1, 0)) < 1e-12);
  CHECK(std::abs(std::abs(n(0, 0)) - std::sqrt(0.5)) < 1e-12);
  CHECK(std::abs(n(2, 0)) < 1e-12);
}

TEST_CASE("nullspace intersections") {
  CHECK(intersect_nullspaces(RealMatrix::zeros(1, 3), RealMatrix::zeros(2, 3)).cols() == 3);
  DenseMatrix e1 = DenseMatrix::Zero(1, 3), e2 = DenseMatrix::Zero(1, 3);
  e1(0, 0) = 1;
  e2(0, 1) = 1;
  const DenseMatrix n = intersect_nullspaces(RealMatrix(e1), RealMatrix(e2));
  REQUIRE(n.cols() == 1);
  CHECK(std::abs(std::abs(n(2, 0)) - 1.0) < 1e-12);

  // both annihilate a chosen 2-dimensional subspace of R^6
  std::mt19937_64 rng(11);
  const DenseMatrix S = gaussian(rng, 6, 2);
  const DenseMatrix P = DenseMatrix::Identity(6, 6) - S * (S.transpose() * S).inverse() * S.transpose();
  const DenseMatrix m1 = gaussian(rng, 3, 6) * P, m2 = gaussian(rng, 4, 6) * P;
  const DenseMatrix k = intersect_nullspaces(RealMatrix(m1), RealMatrix(m2));
  REQUIRE(k.cols() == 2);
  // brute force: the projection of S onto span(k) reproduces S
  CHECK((S - k * (k.transpose() * S)).norm() < 1e-10 * S.norm());
}

TEST_CASE("least squares projection") {
  Vector b(3);
  b << 1, -2, 5;
  auto r = least_squares_project(RealMatrix(DenseMatrix(DenseMatrix::Identity(3, 3))), b);
  CHECK((r.x - b).norm() < 1e-14);
  CHECK(r.r.norm() < 1e-14);

  DenseMatrix e1 = DenseMatrix::Zero(2, 1);
  e1(0, 0) = 1;
  Vector b2(2);
  b2 << 1, 1;
  r = least_squares_project(RealMatrix(e1), b2);
  CHECK(r.x[0] == Approx(1.0));
  CHECK(std::abs(r.r[0]) < 1e-14);
  CHECK(r.r[1] == Approx(1.0));

  std::mt19937_64 rng(5);
  const DenseMatrix a = gaussian(rng, 20, 7);
  const Vector bb = gaussian(rng, 20, 1).col(0);
  r = least_squares_project(RealMatrix(a), bb);
  CHECK((a.transpose() * r.r).norm() < 1e-10 * bb.norm());
  CHECK(bb.squaredNorm() == Approx((a * r.x).squaredNorm() + r.r.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("smallest positive singular value") {
  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 2;
  CHECK(smallest_positive_singular_value(RealMatrix(d)) == Approx(2.0));
  CHECK(smallest_positive_singular_value(RealMatrix(DenseMatrix(DenseMatrix::Identity(4, 4)))) == Approx(1.0));
  CHECK_THROWS_AS(smallest_positive_singular_value(RealMatrix::zeros(2, 2)), NoPositiveSingularValue);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const DenseMatrix m = gaussian(rng, 6, 4) * gaussian(rng, 4, 5);
    const double a = smallest_positive_singular_value(RealMatrix(m));
    const double b = smallest_positive_singular_value(RealMatrix(DenseMatrix(m.transpose())));
    CHECK(std::abs(a - b) <= 1e-10 * a);
  }
}

TEST_CASE("non-finite input is rejected") {
  DenseMatrix m = DenseMatrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(numerical_rank(RealMatrix(m)), InputError);
}

TEST_CASE("exact modular rank") {
  // rank 2 over Q with a large entry that would be fragile in floating point
  IntMatrix a = IntMatrix::from_entries(3, 3, {{0, 0, 1}, {0, 1, 1000003}, {1, 1, 1}, {2, 0, 2}, {2, 1, 2000007}});
  CHECK(exact_rank(a) == 2);
  CHECK(exact_rank(IntMatrix::identity(5)) == 5);
  CHECK(exact_rank(IntMatrix::from_entries(4, 3, {})) == 0);
  const IntMatrix p = a * a.transpose();
  CHECK(p.transpose() == p);
}

TEST_CASE("verify_complex") {
  CHECK(verify_complex(zero_triple(2, 3, 4, 5)).ok);
  DenseMatrix e1 = DenseMatrix::Zero(2, 1), e2t = DenseMatrix::Zero(1, 2), e1t = DenseMatrix::Zero(1, 2);
  e1(0, 0) = 1;
  e2t(0, 1) = 1;
  e1t(0, 0) = 1;
  OperatorTriple good{RealMatrix(e1), RealMatrix(e2t), RealMatrix::zeros(0, 1), "good"};
  CHECK(verify_complex(good).ok);
  OperatorTriple bad{RealMatrix(e1), RealMatrix(e1t), RealMatrix::zeros(0, 1), "bad"};
  const auto c = verify_complex(bad);
  CHECK_FALSE(c.ok);
  CHECK(c.residual10 == Approx(1.0));
}

TEST_CASE("cohomology of the zero triple") {
  const auto r = cohomology(zero_triple(2, 3, 4, 5));
  CHECK(r.dim_N0 == 2);
  CHECK(r.dim_K1 == 3);
  CHECK(r.dim_K2 == 4);
  CHECK(r.dim_N2star == 5);
  CHECK(r.index_D == -2);
  CHECK(r.index_Dstar == 2);
}

TEST_CASE("shape and weight errors") {
  OperatorTriple t{RealMatrix::zeros(3, 2), RealMatrix::zeros(4, 2), RealMatrix::zeros(5, 4), "broken"};
  CHECK_THROWS_AS(cohomology(t), InputError);
  const OperatorTriple z = zero_triple(1, 2, 2, 1);
  DenseMatrix neg = -DenseMatrix::Identity(2, 2);
  WeightSpec w{RealMatrix(neg), RealMatrix(DenseMatrix(DenseMatrix::Identity(2, 2)))};
  CHECK_THROWS_AS(cohomology(z, w), InputError);
  DenseMatrix asym = DenseMatrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  w.lambda1 = RealMatrix(asym);
  CHECK_THROWS_AS(cohomology(z, w), InputError);
}

TEST_CASE("block operator shapes and adjointness") {
  const auto z = build_dirac(zero_triple(2, 3, 4, 5));
  CHECK(z.matrix.rows() == 5 + 3);
  CHECK(z.matrix.cols() == 4 + 2);
  CHECK(z.matrix.to_dense().isZero());

  std::mt19937_64 rng(21);
  const OperatorTriple t = random_complex(rng, {7});
  const auto d = t.dims();
  const auto plain = build_dirac(t);
  // identity weights: the adjoint is the transpose
  CHECK((plain.adjoint.to_dense() - plain.matrix.to_dense().transpose()).norm() < 1e-14);

  WeightSpec w{RealMatrix(random_spd(rng, d[1])), RealMatrix(random_spd(rng, d[2]))};
  const auto D = build_dirac(t, w);
  const DenseMatrix M = D.matrix.to_dense(), A = D.adjoint.to_dense();
  const DenseMatrix gin = D.in_metric.to_dense(), gout = D.out_metric.to_dense();
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int s = 0; s < 100; ++s) {
    Vector x(M.cols()), y(M.rows());
    for (auto& v : x) v = nd(rng);
    for (auto& v : y) v = nd(rng);
    const double lhs = (M * x).dot(gout * y), rhs = x.dot(gin * (A * y));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("kernel of the block operator") {
  const OperatorTriple z = zero_triple(2, 3, 4, 5);
  const auto rep = cohomology(z);
  const auto k = kernel_of_dirac(build_dirac(z), rep);
  CHECK(k.dim == 6);
  CHECK(k.dim_adjoint == 8);

  std::mt19937_64 rng(4);
  for (int s = 0; s < 20; ++s) {
    const OperatorTriple t = random_complex(rng, {9});
    const auto r = cohomology(t);
    const auto kd = kernel_of_dirac(build_dirac(t), r);
    CHECK(kd.verified);
    CHECK(dirac_index(build_dirac(t)) == r.index_D);
  }
}

TEST_CASE("Helmholtz decomposition") {
  std::mt19937_64 rng(8);
  OperatorTriple t;
  do {
    t = random_complex(rng, {9});
  } while (t.dims()[2] < 3);
  const auto d = t.dims();
  WeightSpec w{RealMatrix(random_spd(rng, d[1])), RealMatrix(random_spd(rng, d[2]))};
  const DenseMatrix l2 = w.lambda2.to_dense();

  const Vector y = gaussian(rng, d[1], 1).col(0);
  const Vector x1 = t.A1.to_dense() * y;
  auto p = helmholtz_decompose(t, w, x1);
  CHECK(p.ran_A2star.norm() < 1e-9 * std::max(1.0, x1.norm()));
  CHECK(p.k2.norm() < 1e-9 * std::max(1.0, x1.norm()));

  const Vector x = gaussian(rng, d[2], 1).col(0);
  p = helmholtz_decompose(t, w, x);
  auto sq = [&](const Vector& v) { return v.dot(l2 * v); };
  CHECK(sq(x) == Approx(sq(p.ran_A2star) + sq(p.k2) + sq(p.ran_A1)).epsilon(1e-9));
  CHECK(std::abs(p.k2.dot(l2 * p.ran_A1)) < 1e-9 * sq(x));
  // the harmonic part decomposes into itself
  if (p.k2.norm() > 1e-8) {
    const auto q = helmholtz_decompose(t, w, p.k2);
    CHECK(q.ran_A2star.norm() < 1e-8 * p.k2.norm());
    CHECK(q.ran_A1.norm() < 1e-8 * p.k2.norm());
  }
}

TEST_CASE("Poincare constants of small operators") {
  OperatorTriple id{RealMatrix::zeros(1, 0), RealMatrix::zeros(1, 1), RealMatrix(DenseMatrix(DenseMatrix::Identity(1, 1))),
                    "id"};
  auto pc = poincare_constant(build_dirac(id));
  CHECK(pc.c == Approx(1.0));
  CHECK(pc.certified);

  DenseMatrix a2 = DenseMatrix::Zero(2, 2);
  a2(0, 0) = 2;
  OperatorTriple dg{RealMatrix::zeros(0, 0), RealMatrix::zeros(2, 0), RealMatrix(a2), "diag"};
  pc = poincare_constant(build_dirac(dg));
  CHECK(pc.c == Approx(0.5));
  CHECK(std::abs(pc.c - pc.c_adjoint) <= 1e-10 * pc.c);
  CHECK_THROWS_AS(poincare_constant(build_dirac(zero_triple(1, 1, 1, 1))), NoPositiveSingularValue);
}

TEST_CASE("weights leave the cohomology unchanged") {
  std::mt19937_64 rng(12);
  for (int s = 0; s < 20; ++s) {
    const OperatorTriple t = random_complex(rng, {10});
    const auto d = t.dims();
    WeightSpec w{RealMatrix(random_spd(rng, d[1])), RealMatrix(random_spd(rng, d[2]))};
    const auto r0 = cohomology(t);
    const auto wt = apply_weights(t, w);
    CHECK(verify_complex(wt.triple).ok);
    const auto r1 = cohomology(wt.triple, wt.weights);
    CHECK(r1.dim_K1 == r0.dim_K1);
    CHECK(r1.dim_K2 == r0.dim_K2);
    CHECK(r1.index_D == r0.index_D);
  }
  const OperatorTriple z = zero_triple(1, 2, 3, 1);
  const auto same = apply_weights(z, WeightSpec::identity(2, 3));
  CHECK(same.triple.A1.to_dense() == z.A1.to_dense());
}

TEST_CASE("general index relation") {
  CohomologyReport box;
  box.dim_N2star = 1;
  box.finalize();
  CHECK(general_index_relation(box, 1, 1, 0) == std::optional<bool>(true));

  CohomologyReport ela_torus;
  ela_torus.dim_N2star = 6;
  ela_torus.dim_K2 = 6;
  ela_torus.finalize();
  CHECK(general_index_relation(ela_torus, 1, 1, 1) == std::optional<bool>(true));
  ela_torus.dim_K2 = 5;
  ela_torus.finalize();
  CHECK(general_index_relation(ela_torus, 1, 1, 1) == std::optional<bool>(false));

  const auto z = cohomology(zero_triple(2, 3, 4, 5));
  CHECK(general_index_relation(z, 2, 1, 0) != std::optional<bool>(true));
}

TEST_CASE("random complex battery", "[property]") {
  const auto b = random_complex_battery(2024, 200, 12);
  CHECK(b.failures() == 0);
  CHECK(b.index_passed == 200);
  CHECK(b.dual_passed == 200);
  CHECK(b.weight_passed == 200);
  CHECK(random_complex_battery(1, 0).records.empty());
  const auto again = random_complex_battery(2024, 200, 12);
  for (size_t i = 0; i < b.records.size(); ++i) CHECK(again.records[i].report.index_D == b.records[i].report.index_D);
}
