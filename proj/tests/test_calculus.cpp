#include <catch_amalgamated.hpp>

#include <random>

#include "fredholm/identities.hpp"
#include "fredholm/poincare.hpp"

using namespace fredholm;
using namespace fredholm::fields;
using F = PolynomialField;
using P = Polynomial3;

namespace {

P x(int i) { return P::coord(i); }

F vec(P a, P b, P c) { return F::vector({a, b, c}); }

F unit_vector(int i) {
  std::array<P, 3> c{};
  c[size_t(i)] = 1;
  return F::vector(c);
}

F identity_tensor() {
  F t = F::zero(FieldShape::tensor);
  for (int i = 0; i < 3; ++i) t(i, i) = 1;
  return t;
}

}  // namespace

TEST_CASE("pointwise operations") {
  CHECK(apply(spn(unit_vector(0)), unit_vector(1)) == unit_vector(2));
  const F u = F::scalar(x(0) * x(1) + 3);
  CHECK(dev(times_id(u)).is_zero());
  std::mt19937_64 rng(1);
  const F v = random_field(rng, FieldShape::vector, 2);
  CHECK(sym(spn(v)).is_zero());
  CHECK(spn_inv(spn(v)) == v);
  const F S = random_field(rng, FieldShape::tensor, 2);
  CHECK(sym(S) + skw(S) == S);
  CHECK(tr(dev(S)).is_zero());
}

TEST_CASE("differential operations") {
  const F X = vec(x(0), x(1), x(2));
  CHECK(Grad(X) == identity_tensor());
  CHECK(tr(Grad(X)) == F::scalar(3));
  CHECK(div(X) == F::scalar(3));
  F e11 = F::zero(FieldShape::tensor);
  e11(0, 0) = 2;
  CHECK(Gradgrad(F::scalar(x(0) * x(0))) == e11);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const F u = random_field(rng, FieldShape::scalar, 3);
    CHECK(Curl(Gradgrad(u)).is_zero());
  }
  CHECK_THROWS_AS(div(F::scalar(x(0))), InputError);
  CHECK_THROWS_AS(apply_operator("nabla", X), InputError);
}

TEST_CASE("catalogue entries on hand-picked fields") {
  // Div spn v = -curl v with v = (x2^2, 0, x1 x3)
  const F v = vec(x(1) * x(1), 0, x(0) * x(2));
  CHECK(Div(spn(v)) == -curl(v));
  CHECK(curl(v) == vec(0, -x(2), Rational(-2) * x(1)));
  // Curl(u id) = -spn grad u with u = x1 x2 x3
  const F u = F::scalar(x(0) * x(1) * x(2));
  CHECK(Curl(times_id(u)) == -spn(grad(u)));
  std::mt19937_64 rng(3);
  const F w = random_field(rng, FieldShape::vector, 3);
  CHECK(dev(Curl(spn(w))) == -transpose(dev(Grad(w))));
}

TEST_CASE("identity catalogue holds exactly", "[property]") {
  IdentityOptions o;
  o.seed = 1;
  o.trials = 100;
  const auto r = verify_identity_catalogue(o);
  CHECK(r.all_passed());
  CHECK(r.results.size() >= 30);
  for (const auto& e : r.results) CHECK(e.trials == 100);
}

TEST_CASE("injected failure is reported") {
  IdentityOptions o;
  o.trials = 3;
  o.inject_failure = true;
  const auto r = verify_identity_catalogue(o);
  CHECK_FALSE(r.all_passed());
  CHECK(r.failures() == 1);
  CHECK_FALSE(r.results.back().passed);
  CHECK_FALSE(r.results.back().counterexample.empty());
  o.trials = 0;
  CHECK_THROWS_AS(verify_identity_catalogue(o), InputError);
}

TEST_CASE("line integrals") {
  const F u = F::scalar(x(0) * x(0) * x(1));
  const auto path = PiecewisePath::open({{0.1, -0.3, 0.2}, {0.7, 0.4, -0.1}, {-0.2, 0.9, 0.5}});
  const double lhs = line_integral_vector(grad(u), path);
  const double rhs = u.eval(path.end())[0] - u.eval(path.start())[0];
  CHECK(std::abs(lhs - rhs) < 1e-13);
  const auto loop = PiecewisePath::loop({{0, 0, 0}, {1, 0.2, 0}, {0.3, 1, 0.4}});
  CHECK(std::abs(line_integral_vector(grad(u), loop)) < 1e-13);
  const auto rows = line_integral_rows(identity_tensor(), path);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(rows[i] - (path.end()[size_t(i)] - path.start()[size_t(i)])) < 1e-14);
  CHECK_THROWS_AS(PiecewisePath::open({{0, 0, 0}}), InputError);
  CHECK_THROWS_AS(PiecewisePath::open({{0, 0, 0}, {0, 0, 0}}), InputError);
}

TEST_CASE("devGrad representation") {
  const auto seg = PiecewisePath::open({{0, 0, 0}, {1, 0, 0}});
  CHECK(check_devgrad_representation(vec(x(0), x(1), x(2)), seg).max() < 1e-13);
  const F v = vec(x(0) * x(0), 0, 0);
  const Rational r43(4, 3);
  CHECK(Div(transpose(devGrad(v))) == vec(P(r43), 0, 0));
  // div v(e1) - div v(0) = 2 = 3/2 * int <(4/3, 0, 0), dl>
  CHECK(std::abs(1.5 * line_integral_vector(Div(transpose(devGrad(v))), seg) - 2.0) < 1e-14);
  CHECK(check_devgrad_representation(v, seg).max() < 1e-13);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t)
    CHECK(check_devgrad_representation(random_field(rng, FieldShape::vector, 3), random_path(rng, 4)).max() < 1e-12);
}

TEST_CASE("Gradgrad representation") {
  const auto seg = PiecewisePath::open({{0, 0, 0}, {1, 0, 0}});
  const F u = F::scalar(x(0) * x(0));
  // u(e1) - u(0) - grad u(0).e1 = 1 = int_0^1 (1 - t) 2 dt
  CHECK(check_gradgrad_representation(u, seg).max() < 1e-13);
  CHECK(Gradgrad(F::scalar(Rational(2) * x(0) - x(2) + P(5))).is_zero());
  CHECK(check_gradgrad_representation(F::scalar(Rational(2) * x(0) - x(2) + P(5)), seg).max() < 1e-14);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto zig = PiecewisePath::open({{0, 0, 0}, {0.5, 0.5, 0}, {1, 0, 0.3}, {1.5, 0.5, -0.2}, {2, 0, 0}});
    CHECK(check_gradgrad_representation(random_field(rng, FieldShape::scalar, 3), zig).max() < 1e-12);
  }
}

TEST_CASE("symGrad representation") {
  // rotation e1 x x: symGrad vanishes, curl = 2 e1
  const F rot = vec(0, -x(2), x(1));
  CHECK(symGrad(rot).is_zero());
  CHECK(curl(rot) == vec(2, 0, 0));
  const auto p = PiecewisePath::open({{0.2, 0.1, 0}, {0.5, 0.9, 0.4}});
  CHECK(check_symgrad_representation(rot, p).max() < 1e-14);
  CHECK(check_symgrad_representation(vec(x(1) * x(1), 0, 0), p).max() < 1e-12);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto loop = random_path(rng, 4, true);
    const F v = random_field(rng, FieldShape::vector, 2);
    CHECK(check_symgrad_representation(v, loop).max() < 1e-12);
  }
}

TEST_CASE("degree-one fields need no corrections") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const F v = random_field(rng, FieldShape::vector, 1);
    CHECK(Div(transpose(devGrad(v))).is_zero());
    CHECK(Gradgrad(random_field(rng, FieldShape::scalar, 1)).is_zero());
    CHECK(Curl(transpose(Curl(symGrad(v)))).is_zero());
  }
  const auto r = run_poincare_suite(11, 20, 1);
  CHECK(r.passed());
}

TEST_CASE("Poincare-map suite", "[property]") {
  const auto r = run_poincare_suite(1, 100, 3);
  CHECK(r.passed());
  CHECK(r.closed_exact <= 1e-12);
  CHECK(r.path_independence <= 1e-12);
  CHECK_THROWS_AS(run_poincare_suite(1, 0), InputError);
}

TEST_CASE("functional matrices of polynomial multipliers") {
  // exact fields have vanishing loop functionals; the closed forms are unitriangular
  const auto loop = PiecewisePath::loop({{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}});
  const F g = grad(F::scalar(x(0) * x(1) - x(2)));
  const auto fm = functional_matrix({g}, ComplexKind::derham, {loop}, {{1, 0, 0}});
  CHECK(std::abs(fm.values(0, 0)) < 1e-14);
  const auto e = expected_functional_matrix(ComplexKind::bih1, {{0.5, 0.25, -1}});
  CHECK(e.rows() == 4);
  CHECK((e - Eigen::MatrixXd::Identity(4, 4)).norm() > 0);
  CHECK(std::abs(e.determinant() - 1.0) < 1e-14);
  const auto ee = expected_functional_matrix(ComplexKind::ela, {{0.5, 0.25, -1}});
  CHECK(ee.rows() == 6);
  CHECK(std::abs(ee.determinant() - 1.0) < 1e-14);
  CHECK_THROWS_AS(functional_matrix({g}, ComplexKind::derham, {loop}, {}), InputError);
}
