#include <catch_amalgamated.hpp>

#include "fredholm/derham.hpp"
#include "fredholm/dirac.hpp"
#include "fredholm/zoo.hpp"

using namespace fredholm;

namespace {

VoxelDomain zoo(const std::string& name, int r = 2) { return refine(named_domain(name), r); }

}  // namespace

TEST_CASE("cubical de Rham operators") {
  const auto box = zoo("box");
  const auto ring = build_derham(box, BoundaryCondition::dirichlet);
  const auto full = build_derham(box, BoundaryCondition::none);
  CHECK(derham_complex_exact(ring));
  CHECK(derham_complex_exact(full));
  CHECK(kernel_dim(ring.G) == 0);
  CHECK(kernel_dim(full.G) == 1);
  CHECK(kernel_dim(build_derham(zoo("two-boxes"), BoundaryCondition::none).G) == 2);
  CHECK(ring.dims()[3] == full.dims()[3]);
  CHECK(ring.dims()[0] < full.dims()[0]);
}

TEST_CASE("de Rham index on the zoo") {
  const std::map<std::string, long long> expected = {{"box", -1},         {"two-boxes", -2},         {"hollow-box", -2},
                                                     {"solid-torus", 0},  {"torus-with-cavity", -1}, {"genus-2", 1}};
  for (const auto& s : named_shapes()) {
    const auto d = zoo(s.name);
    const auto r = derham_index(d);
    INFO(s.name);
    CHECK(r.dim_N0 == 0);
    CHECK(r.dim_K1 == s.m - 1);
    CHECK(r.dim_K2 == s.p);
    CHECK(r.dim_N2star == s.n);
    CHECK(r.index_D == expected.at(s.name));
    CHECK(r.index_D == s.p - s.m - s.n + 1);
  }
}

TEST_CASE("harmonic Dirichlet fields") {
  CHECK(harmonic_dirichlet_fields(zoo("box")).dim == 0);
  CHECK(harmonic_dirichlet_fields(zoo("solid-torus")).dim == 0);
  const auto h = harmonic_dirichlet_fields(zoo("hollow-box"));
  CHECK(h.dim == 1);
  REQUIRE(h.constructed.size() == 1);
  CHECK(h.constructed_residual < 1e-8);
  CHECK(h.kernel_residual < 1e-8);
}

TEST_CASE("harmonic Neumann fields") {
  CHECK(harmonic_neumann_fields(zoo("box")).dim == 0);
  const auto t = harmonic_neumann_fields(zoo("solid-torus"));
  REQUIRE(t.dim == 1);
  CHECK(std::abs(t.pairing(0, 0) - 1.0) < 1e-8);
  const auto g = harmonic_neumann_fields(zoo("genus-2"));
  REQUIRE(g.dim == 2);
  CHECK((g.pairing - DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(g.flags.empty());
}

TEST_CASE("Dirichlet Laplace problem") {
  const auto d = zoo("hollow-box");
  const auto s = solve_dirichlet_laplace(d, 1);
  REQUIRE_FALSE(s.empty);
  // discrete maximum principle
  CHECK(s.u.values.minCoeff() >= -1e-12);
  CHECK(s.u.values.maxCoeff() <= 1 + 1e-12);
  CHECK(std::abs(s.u.values.maxCoeff() - 1.0) < 1e-12);
  CHECK(std::abs(s.u.values.minCoeff()) < 1e-12);
  CHECK(s.residual < 1e-8);
  const auto ring = build_derham(d, BoundaryCondition::dirichlet);
  const SparseMatrix C = ring.C.to_real(), G = ring.G.to_real();
  CHECK((C * s.grad).norm() < 1e-8);
  CHECK((G.transpose() * s.grad).norm() < 1e-8);
  CHECK(solve_dirichlet_laplace(zoo("box"), 1).empty);
  CHECK_THROWS_AS(solve_dirichlet_laplace(d, 2), InputError);
}

TEST_CASE("Neumann Laplace problem") {
  CHECK(solve_neumann_laplace(zoo("box"), 1).empty);
  const auto d = zoo("solid-torus");
  const auto s = solve_neumann_laplace(d, 1);
  REQUIRE_FALSE(s.empty);
  CHECK(s.projected.norm() > 0.1);
  CHECK(s.projected.norm() <= s.theta.norm() + 1e-12);
  CHECK(s.divergence_residual < 1e-8);
  const auto full = build_derham(d, BoundaryCondition::none);
  const auto hs = handle_system(full.cx, 1);
  double pair = 0;
  for (const auto& st : hs.loop_edges[0]) pair += st.sign * s.projected[st.edge];
  CHECK(std::abs(pair - 1.0) < 1e-8);
  CHECK_THROWS_AS(solve_neumann_laplace(d, 2), InputError);
}

TEST_CASE("Friedrichs constant of the gradient") {
  const double c = friedrichs_constant(zoo("box"));
  CHECK(c > 0);
  // a larger box has a larger constant
  CHECK(friedrichs_constant(zoo("box", 3)) > c);
}

TEST_CASE("extended Maxwell operator") {
  for (const auto& s : named_shapes()) {
    const auto m = extended_maxwell(zoo(s.name));
    INFO(s.name);
    CHECK(m.skew);
    CHECK(m.index() == 0);
    CHECK(m.kernel_dim == s.n + s.m + s.p - 1);
  }
}

TEST_CASE("unitary and symbol factors") {
  const auto good = check_factors(equivalence_factors());
  CHECK(good.all());
  const auto shown = check_factors(displayed_factors());
  CHECK(shown.U_orthogonal);
  CHECK(shown.W_orthogonal);
  CHECK(shown.V_isometric);
  CHECK(shown.V_i_Vstar);
  CHECK(shown.coefficients_match);
  CHECK(shown.sigma_hermitian);
  CHECK(shown.sigma_involutive);
  CHECK_FALSE(shown.symbol_identity);
  const auto f = equivalence_factors();
  CHECK(detail::signed_permutation(f.U));
  CHECK(detail::signed_permutation(f.W));
}

TEST_CASE("Maxwell and Dirac operators are unitarily equivalent") {
  for (const auto& s : named_shapes()) {
    const auto r = unitary_equivalence_check(zoo(s.name));
    INFO(s.name);
    CHECK(r.equal);
    CHECK(r.differing_entries == 0);
    CHECK(r.E_orthogonal);
    CHECK(r.M_skew);
    CHECK(r.L_skew);
    CHECK(r.index_L == 0);
    CHECK(r.index_Q == r.index_D);
    CHECK(r.index_Q == s.p - s.m - s.n + 1);
    CHECK(r.kernel_M == s.n + s.m + s.p - 1);
    if (r.spectra_compared) CHECK(r.spectra_difference < 1e-10);
  }
}

TEST_CASE("negative control is detected") {
  DiracOptions o;
  o.negative_control = true;
  o.compare_spectra = false;
  const auto r = unitary_equivalence_check(zoo("box"), o);
  CHECK_FALSE(r.equal);
  CHECK(r.differing_entries > 0);
  CHECK_FALSE(r.differing_blocks.empty());
}
