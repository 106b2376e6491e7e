#include <catch_amalgamated.hpp>

#include "fredholm/report.hpp"
#include "fredholm/zoo.hpp"

using namespace fredholm;

namespace {

VoxelDomain zoo(const std::string& name, int r = 2) { return refine(named_domain(name), r); }

void check_indices(const json& j) {
  if (j.is_object()) {
    if (j.contains("index_D") && j.contains("N0") && j.contains("K1") && j.contains("K2") && j.contains("N2star")) {
      const long long ind = j["N0"].get<long long>() - j["K1"].get<long long>() + j["K2"].get<long long>() -
                            j["N2star"].get<long long>();
      CHECK(j["index_D"].get<long long>() == ind);
    }
    for (const auto& [k, v] : j.items()) check_indices(v);
  } else if (j.is_array()) {
    for (const auto& v : j) check_indices(v);
  }
}

}  // namespace

TEST_CASE("violation scan") {
  json doc = new_document("x");
  CHECK_FALSE(has_violation(doc));
  doc["a"]["flags"] = json::array({flag(kSeverityWarning, "w", "m")});
  CHECK_FALSE(has_violation(doc));
  doc["b"] = json::array({json::object({{"flags", json::array({flag(kSeverityViolation, "v", "m")})}})});
  CHECK(has_violation(doc));
}

TEST_CASE("complex analysis on the box") {
  const auto d = zoo("box");
  const auto t = invariants(d);
  const long long expected[] = {-1, -4, -4, -6};
  int i = 0;
  for (auto k : {ComplexKind::derham, ComplexKind::bih1, ComplexKind::bih2, ComplexKind::ela}) {
    const json j = analyze_complex(d, t, k);
    INFO(to_string(k));
    CHECK(j["index_D"] == expected[i++]);
    CHECK(j["matches_targets"] == true);
    CHECK(j["flags"].is_array());
    CHECK_FALSE(has_violation(j));
    REQUIRE(j["poincare_constant"].is_object());
    CHECK(j["poincare_constant"]["agree"] == true);
    CHECK(j["poincare_constant"]["certified"] == true);
    check_indices(j);
  }
}

TEST_CASE("analysis of the hollow box reports the cavity") {
  const auto d = zoo("hollow-box");
  const json j = analyze_complex(d, invariants(d), ComplexKind::ela);
  CHECK(j["K1"] == 6);
  CHECK(j["targets"]["K1"] == 6);
}

TEST_CASE("de Rham analysis carries the Maxwell section") {
  const auto d = zoo("solid-torus");
  const json j = analyze_complex(d, invariants(d), ComplexKind::derham);
  CHECK(j["index_D"] == 0);
  CHECK(j["maxwell"]["skew"] == true);
  CHECK(j["maxwell"]["kernel_dim"] == 2);
  CHECK(j["cubical"]["agrees_with_lattice"] == true);
}

TEST_CASE("reports are byte-stable") {
  const auto d = zoo("solid-torus");
  const auto t = invariants(d);
  const std::string a = analyze_complex(d, t, ComplexKind::bih1).dump(2);
  const std::string b = analyze_complex(d, t, ComplexKind::bih1).dump(2);
  CHECK(a == b);
  CHECK(battery_json(random_complex_battery(3, 30)).dump() == battery_json(random_complex_battery(3, 30)).dump());
}

TEST_CASE("battery report") {
  const json empty = battery_json(random_complex_battery(1, 0));
  CHECK(empty["count"] == 0);
  CHECK(empty["failing"].empty());
  const json j = battery_json(random_complex_battery(5, 40));
  CHECK(j["index_passed"] == 40);
  CHECK(j["failures"] == 0);
}

TEST_CASE("basis report and export") {
  const auto d = zoo("hollow-box");
  const auto b = build_basis(d, ComplexKind::bih1, BasisKind::dirichlet);
  const json j = basis_json(d, b, true);
  CHECK(j["count"] == 4);
  CHECK(j["gram_condition"].is_number());
  CHECK(j["independent"] == true);
  CHECK(j["span_equal"] == true);
  CHECK(j["flags"].empty());
  REQUIRE(j.contains("export"));
  CHECK(j["export"]["fields"].size() == 4);
  CHECK(j["export"]["fields"][0].size() == j["export"]["positions"].size());
  CHECK(j["export"]["components"].size() == j["export"]["positions"].size());

  const auto box = zoo("box");
  const json e = basis_json(box, build_basis(box, ComplexKind::bih1, BasisKind::dirichlet), false);
  CHECK(e["count"] == 0);
  CHECK_FALSE(e["notes"].empty());
  CHECK_FALSE(e.contains("export"));
}

TEST_CASE("identity and Dirac reports") {
  IdentityOptions o;
  o.trials = 3;
  o.inject_failure = true;
  const json id = identities_json(verify_identity_catalogue(o));
  CHECK(id["passed"] == false);
  CHECK(id["failures"] == 1);
  CHECK(poincare_suite_json(run_poincare_suite(1, 5))["passed"] == true);

  const auto d = zoo("box");
  const json ok = dirac_json(unitary_equivalence_check(d));
  CHECK(ok["equal"] == true);
  CHECK(ok["index_Q"] == -1);
  CHECK(ok["index_L"] == 0);
  CHECK_FALSE(has_violation(ok));
  DiracOptions neg;
  neg.negative_control = true;
  const json nc = dirac_json(unitary_equivalence_check(d, neg));
  CHECK(nc["negative_control_detected"] == true);
  CHECK_FALSE(has_violation(nc));
}

TEST_CASE("provenance omits runtimes unless asked") {
  const json p = provenance_json(7ull, RankTolerance{}, 2, std::nullopt);
  CHECK(p["seed"] == 7);
  CHECK(p["resolution"] == 2);
  CHECK_FALSE(p.contains("runtime_seconds"));
  CHECK(provenance_json(std::nullopt, RankTolerance{}, std::nullopt, 1.5).contains("runtime_seconds"));
}
