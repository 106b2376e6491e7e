#include <catch_amalgamated.hpp>

#include "fredholm/basis.hpp"
#include "fredholm/tensor.hpp"
#include "fredholm/zoo.hpp"

using namespace fredholm;

namespace {

VoxelDomain zoo(const std::string& name, int r = 2) { return refine(named_domain(name), r); }

TensorComplex tensor(const std::string& name, ComplexKind k, int r = 2) {
  return build_tensor_complex(zoo(name, r), k, 1.0, {true});
}

const std::array<ComplexKind, 4> kKinds = {ComplexKind::derham, ComplexKind::bih1, ComplexKind::bih2, ComplexKind::ela};

}  // namespace

TEST_CASE("tensor complexes are exact complexes") {
  for (const auto& s : named_shapes())
    for (auto k : kKinds) {
      const auto tc = tensor(s.name, k);
      INFO(s.name << " " << to_string(k));
      CHECK((tc.triple.A[1] * tc.triple.A[0]).is_zero());
      CHECK((tc.triple.A[2] * tc.triple.A[1]).is_zero());
    }
}

TEST_CASE("tensor layouts") {
  const auto bih1 = tensor("box", ComplexKind::bih1);
  CHECK(bih1.lattice.space[1].parity.size() == 6);
  CHECK(bih1.triple.A[0].rows == bih1.lattice.space[1].size());
  const auto ela = tensor("box", ComplexKind::ela);
  CHECK(ela.lattice.space[1].parity.size() == 6);
  CHECK(ela.lattice.space[2].parity.size() == 6);
  CHECK(parse_kind("ela") == ComplexKind::ela);
  CHECK_THROWS_AS(parse_kind("maxwell"), InputError);
  CHECK_THROWS_AS(build_tensor_complex(zoo("box"), ComplexKind::bih1, -1.0), InputError);
}

TEST_CASE("thin domains are refused unless allowed") {
  CHECK_THROWS_AS(build_tensor_complex(zoo("box"), ComplexKind::bih2), DomainTooThin);
  CHECK_NOTHROW(build_tensor_complex(zoo("box"), ComplexKind::bih2, 1.0, {true}));
}

TEST_CASE("kernels without boundary conditions") {
  CHECK(kernel_dim_no_bc(tensor("box", ComplexKind::ela)) == 6);
  CHECK(kernel_dim_no_bc(tensor("two-boxes", ComplexKind::bih1)) == 8);
  CHECK(kernel_dim_no_bc(tensor("box", ComplexKind::bih2)) == 4);
  CHECK(kernel_dim_no_bc(tensor("box", ComplexKind::derham)) == 1);
}

TEST_CASE("tensor cohomology") {
  for (auto k : kKinds) {
    const auto r = tensor_cohomology(tensor("box", k));
    const int m = kind_multiplicity(k);
    INFO(to_string(k));
    CHECK(r.dim_N0 == 0);
    CHECK(r.dim_K1 == 0);
    CHECK(r.dim_K2 == 0);
    CHECK(r.dim_N2star == m);
    CHECK(r.index_D == -m);
  }
  CHECK(tensor_cohomology(tensor("hollow-box", ComplexKind::bih1)).dim_K1 == 4);
  const auto t = tensor_cohomology(tensor("solid-torus", ComplexKind::ela));
  CHECK(t.dim_K2 == 6);
  CHECK(general_index_relation(t, 1, 1, 1) == std::optional<bool>(true));
}

TEST_CASE("exact and floating routes agree") {
  const auto tc = tensor("solid-torus", ComplexKind::bih1);
  const auto ex = tensor_cohomology(tc);
  const auto fl = cohomology(real_triple(tc), tc.triple.weights());
  CHECK(fl.dim_K1 == ex.dim_K1);
  CHECK(fl.dim_K2 == ex.dim_K2);
  CHECK(fl.dim_N2star == ex.dim_N2star);
  CHECK(fl.spectral_gap_flags.empty());
}

TEST_CASE("weight invariance", "[property]") {
  const auto box = tensor("box", ComplexKind::ela);
  CHECK(weight_invariance(box, 1, 0).unchanged);
  CHECK(weight_invariance(box, 3, 5, true).unchanged);
  const auto torus = tensor("solid-torus", ComplexKind::bih1);
  const auto w = weight_invariance(torus, 4, 5);
  CHECK(w.unchanged);
  CHECK(w.trials == 5);
  CHECK(w.reference.dim_K2 == 4);
}

TEST_CASE("multiplier families") {
  CHECK(multiplier_family(ComplexKind::bih1, BasisKind::dirichlet) == MultiplierFamily::affine);
  CHECK(multiplier_family(ComplexKind::bih1, BasisKind::neumann) == MultiplierFamily::raviart_thomas);
  CHECK(multiplier_family(ComplexKind::bih2, BasisKind::dirichlet) == MultiplierFamily::raviart_thomas);
  CHECK(multiplier_family(ComplexKind::bih2, BasisKind::neumann) == MultiplierFamily::affine);
  CHECK(multiplier_family(ComplexKind::ela, BasisKind::dirichlet) == MultiplierFamily::rigid_motion);
  CHECK(family_size(MultiplierFamily::rigid_motion) == 6);
  CHECK(family_size(MultiplierFamily::affine) == 4);
  CHECK_THROWS_AS(parse_basis_kind("robin"), InputError);
}

TEST_CASE("Dirichlet bases on the hollow box") {
  const auto d = zoo("hollow-box");
  const auto dr = build_basis(d, ComplexKind::derham, BasisKind::dirichlet);
  CHECK(dr.count() == 1);
  CHECK(independence_check(dr));
  CHECK(span_equality_check(dr));
  for (auto k : {ComplexKind::bih1, ComplexKind::bih2, ComplexKind::ela}) {
    const auto b = build_basis(d, k, BasisKind::dirichlet);
    INFO(to_string(k));
    CHECK(b.count() == kind_multiplicity(k));
    CHECK(b.count() == b.expected_count);
    CHECK(b.verified_dim == b.expected_count);
    CHECK(independence_check(b));
    CHECK(span_equality_check(b));
    CHECK(b.membership_residual < 1e-8);
  }
}

TEST_CASE("empty bases come with a note") {
  const auto b = build_basis(zoo("box"), ComplexKind::bih1, BasisKind::dirichlet);
  CHECK(b.count() == 0);
  CHECK_FALSE(b.notes.empty());
  CHECK(independence_check(b));
  CHECK(span_equality_check(b));
  const auto n = build_basis(zoo("box"), ComplexKind::derham, BasisKind::neumann);
  CHECK(n.count() == 0);
}

TEST_CASE("Neumann bases on the solid torus") {
  const auto d = zoo("solid-torus", 3);
  const auto dr = build_basis(d, ComplexKind::derham, BasisKind::neumann);
  REQUIRE(dr.count() == 1);
  REQUIRE(dr.functionals);
  CHECK(std::abs(dr.functionals->values(0, 0) - 1.0) < 1e-8);
  for (auto k : {ComplexKind::bih1, ComplexKind::bih2, ComplexKind::ela}) {
    const auto b = build_basis(d, k, BasisKind::neumann);
    INFO(to_string(k));
    CHECK(b.count() == kind_multiplicity(k));
    CHECK(b.count() == b.expected_count);
    REQUIRE(b.functionals);
    CHECK(b.functional_error < 1e-6);
    CHECK(std::abs(b.functionals->values.determinant()) > 1e-6);
    CHECK(independence_check(b));
    CHECK(span_equality_check(b));
  }
}

TEST_CASE("independence detects a duplicated field") {
  auto b = build_basis(zoo("hollow-box"), ComplexKind::bih1, BasisKind::dirichlet);
  REQUIRE(b.count() == 4);
  b.fields.push_back(b.fields.front());
  DenseMatrix g(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) g(i, j) = b.fields[size_t(i)].dot(b.fields[size_t(j)]);
  b.gram = g;
  CHECK_FALSE(independence_check(b));
  const auto sc = compare_spans(b.fields, b.kernel_basis, 1e-6);
  CHECK(sc.constructed_outside < 1e-6);
}

TEST_CASE("span comparison notices a missing direction") {
  const auto b = build_basis(zoo("hollow-box"), ComplexKind::bih1, BasisKind::dirichlet);
  std::vector<Vector> three(b.fields.begin(), b.fields.begin() + 3);
  CHECK(span_equality_check(b, b.kernel_basis));
  CHECK(compare_spans(three, b.kernel_basis, 1e-6).kernel_outside > 1e-3);
}

TEST_CASE("geometry errors for basis builders") {
  // at r = 2 the solid torus erodes to nothing
  CHECK_THROWS_AS(build_basis(zoo("solid-torus"), ComplexKind::bih1, BasisKind::neumann), GeometryError);
}
