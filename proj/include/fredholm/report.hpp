#pragma once

// Report assembly: every command produces one JSON document. Keys are sorted
// (nlohmann's default object type), doubles print shortest round-trip, so a
// document is a deterministic function of its inputs unless runtimes are
// requested explicitly.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "basis.hpp"
#include "complex.hpp"
#include "derham.hpp"
#include "dirac.hpp"
#include "identities.hpp"
#include "poincare.hpp"
#include "tensor.hpp"
#include "topology.hpp"

namespace fredholm {

using json = nlohmann::json;

inline constexpr const char* kReportSchema = "fredholm-report/1";
inline constexpr const char* kSeverityViolation = "invariant-violation";
inline constexpr const char* kSeverityWarning = "warning";
inline constexpr const char* kSeverityInfo = "info";

inline json flag(const char* severity, const std::string& code, const std::string& message) {
  return {{"severity", severity}, {"code", code}, {"message", message}};
}

// Any flag of severity invariant-violation anywhere in the tree.
inline bool has_violation(const json& j) {
  if (j.is_object()) {
    if (j.contains("severity") && j["severity"] == kSeverityViolation) return true;
    for (const auto& [k, v] : j.items())
      if (has_violation(v)) return true;
  } else if (j.is_array()) {
    for (const auto& v : j)
      if (has_violation(v)) return true;
  }
  return false;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

inline json topology_json(const TopologyInvariants& t) {
  return {{"n", t.n}, {"m", t.m}, {"p", t.p}, {"betti", t.betti}};
}

inline json domain_json(const VoxelDomain& coarse, const VoxelDomain& fine, int resolution) {
  return {{"label", coarse.label()},
          {"coarse_box", coarse.box()},
          {"coarse_voxels", coarse.count()},
          {"resolution", resolution},
          {"box", fine.box()},
          {"voxels", fine.count()}};
}

inline json cohomology_json(const CohomologyReport& r) {
  json j = {{"N0", r.dim_N0},          {"K1", r.dim_K1},           {"K2", r.dim_K2},       {"N2star", r.dim_N2star},
            {"index_D", r.index_D},    {"index_Dstar", r.index_Dstar}, {"space_dims", r.dims}, {"ranks", r.ranks},
            {"method", r.method}};
  return j;
}

struct AnalyzeOptions {
  RankTolerance tol;
  Index dense_limit = kDenseLimit;  // floating cross-check and Poincare constant
  int samples = 50;
  unsigned seed = 1;
};

// Targets from the topology for multiplicity k.
inline json targets_json(int k, const TopologyInvariants& t) {
  return {{"N0", 0},
          {"K1", k * (t.m - 1)},
          {"K2", k * t.p},
          {"N2star", k * t.n},
          {"index_D", k * (t.p - t.m - t.n + 1)}};
}

inline json poincare_json(const PoincareConstant& pc) {
  const double rel = std::abs(pc.c - pc.c_adjoint) / std::max(pc.c, pc.c_adjoint);
  return {{"c_D", pc.c},
          {"c_Dstar", pc.c_adjoint},
          {"relative_difference", rel},
          {"agree", rel <= 1e-10},
          {"worst_ratio", pc.worst_ratio},
          {"certified", pc.certified}};
}

// One complex on an already refined domain.
inline json analyze_complex(const VoxelDomain& dom, const TopologyInvariants& topo, ComplexKind kind,
                            const AnalyzeOptions& opt = {}) {
  json out;
  json flags = json::array();
  const int k = kind_multiplicity(kind);
  const TensorComplex tc = build_tensor_complex(dom, kind, 1.0, {true});
  if (tc.lattice.space[0].size() == 0)
    flags.push_back(flag(kSeverityInfo, "thin-domain", "H0 has no interior unknowns at this resolution"));

  const bool complex_ok = (tc.triple.A[1] * tc.triple.A[0]).is_zero() && (tc.triple.A[2] * tc.triple.A[1]).is_zero();
  if (!complex_ok) flags.push_back(flag(kSeverityViolation, "not-a-complex", "A1 A0 or A2 A1 is nonzero"));

  CohomologyReport rep = tensor_cohomology(tc);
  out["multiplicity"] = k;
  json c = cohomology_json(rep);
  for (const auto& [key, v] : c.items()) out[key] = v;
  const long long identity = (long long)rep.dim_N0 - rep.dim_K1 + rep.dim_K2 - rep.dim_N2star;
  if (identity != rep.index_D || rep.index_Dstar != -rep.index_D)
    flags.push_back(flag(kSeverityViolation, "index-identity", "index_D differs from N0 - K1 + K2 - N2star"));

  const json targets = targets_json(k, topo);
  out["targets"] = targets;
  std::vector<std::string> miss;
  for (const char* key : {"N0", "K1", "K2", "N2star", "index_D"})
    if (out[key] != targets[key]) miss.push_back(key);
  out["matches_targets"] = miss.empty();
  if (!miss.empty()) {
    std::string s;
    for (const auto& m : miss) s += (s.empty() ? "" : ", ") + m;
    flags.push_back(flag(kSeverityWarning, "target-mismatch",
                         s + " differ from the topological targets at this resolution; refine and compare"));
  }

  const OperatorTriple rt = real_triple(tc);
  const auto d = rt.dims();
  const Index biggest = std::max({d[0], d[1], d[2], d[3]});
  const WeightSpec w = tc.triple.weights();
  if (biggest <= opt.dense_limit) {
    const CohomologyReport fl = cohomology(rt, w, opt.tol);
    const bool same = fl.dim_N0 == rep.dim_N0 && fl.dim_K1 == rep.dim_K1 && fl.dim_K2 == rep.dim_K2 &&
                      fl.dim_N2star == rep.dim_N2star;
    out["floating"] = {{"N0", fl.dim_N0}, {"K1", fl.dim_K1}, {"K2", fl.dim_K2}, {"N2star", fl.dim_N2star},
                       {"agrees_with_exact", same}};
    for (const auto& g : fl.spectral_gap_flags) flags.push_back(flag(kSeverityWarning, "rank-ambiguous", g));
    if (!same && fl.spectral_gap_flags.empty())
      flags.push_back(flag(kSeverityViolation, "route-disagreement", "floating and exact dimensions differ"));
  } else {
    out["floating"] = nullptr;
    flags.push_back(flag(kSeverityInfo, "floating-skipped", "largest space exceeds the dense limit"));
  }

  const DiracBlockOperator D = build_dirac(rt, w);
  out["poincare_constant"] = nullptr;
  if (std::max(D.matrix.rows(), D.matrix.cols()) > opt.dense_limit) {
    flags.push_back(flag(kSeverityInfo, "poincare-skipped", "block operator exceeds the dense limit"));
  } else {
    try {
      const PoincareConstant pc = poincare_constant(D, opt.tol, opt.samples, opt.seed);
      out["poincare_constant"] = poincare_json(pc);
      if (!pc.certified)
        flags.push_back(flag(kSeverityViolation, "poincare-estimate", "a kernel-orthogonal sample violates |z| <= c|Dz|"));
    } catch (const NoPositiveSingularValue&) {
      flags.push_back(flag(kSeverityInfo, "poincare-undefined", "block operator has no positive singular value"));
    }
  }

  if (kind == ComplexKind::derham) {
    // cubical route and the extended Maxwell operator
    const CohomologyReport cub = derham_index(dom);
    const bool same = cub.dim_K1 == rep.dim_K1 && cub.dim_K2 == rep.dim_K2 && cub.index_D == rep.index_D;
    out["cubical"] = {{"N0", cub.dim_N0}, {"K1", cub.dim_K1},           {"K2", cub.dim_K2},
                      {"N2star", cub.dim_N2star}, {"index_D", cub.index_D}, {"agrees_with_lattice", same}};
    if (!same) flags.push_back(flag(kSeverityViolation, "route-disagreement", "cubical and lattice de Rham differ"));
    const MaxwellOperator mx = extended_maxwell(dom);
    const int expect = topo.n + topo.m + topo.p - 1;
    out["maxwell"] = {{"skew", mx.skew},   {"kernel_dim", mx.kernel_dim}, {"expected_kernel_dim", expect},
                      {"index", mx.index()}, {"size", mx.M.rows}};
    if (!mx.skew) flags.push_back(flag(kSeverityViolation, "maxwell-skew", "M^T != -M"));
    if (mx.index() != 0) flags.push_back(flag(kSeverityViolation, "maxwell-index", "ind M != 0"));
    if (mx.kernel_dim != expect)
      flags.push_back(flag(kSeverityWarning, "maxwell-kernel", "dim ker M differs from n + m + p - 1"));
  }
  out["flags"] = flags;
  return out;
}

inline json basis_json(const VoxelDomain& dom, const BasisSet& b, bool export_fields, double tol = 1e-6) {
  json j;
  j["complex"] = to_string(b.kind);
  j["which"] = to_string(b.which);
  j["count"] = b.count();
  j["expected_count"] = b.expected_count;
  j["verified_dim"] = b.verified_dim;
  j["gram_condition"] = b.gram_condition();
  j["independent"] = independence_check(b);
  j["membership_residual"] = b.membership_residual;
  j["orthogonality_residual"] = b.orthogonality_residual;
  j["kernel_residual"] = b.kernel_residual;
  j["span_equal"] = b.kernel_basis.cols() == b.count() ? json(span_equality_check(b, tol)) : json(nullptr);
  json mult = json::array();
  for (const auto& m : b.multipliers)
    mult.push_back({{"index", m.index}, {"factor", m.factor}, {"family", to_string(m.family)},
                    {"kernel_residual", m.kernel_A1_residual}});
  j["multipliers"] = mult;
  if (b.functionals) {
    j["functionals"] = {{"values", matrix_json(b.functionals->values)},
                        {"expected", matrix_json(b.expected_functionals)},
                        {"max_error", b.functional_error},
                        {"projection_gap", b.projection_functional_gap}};
  } else {
    j["functionals"] = nullptr;
  }
  j["notes"] = b.notes;
  json flags = json::array();
  if (b.count() != b.expected_count)
    flags.push_back(flag(kSeverityViolation, "basis-count", "constructed count differs from the topological count"));
  if (b.verified_dim != b.expected_count)
    flags.push_back(flag(kSeverityWarning, "cohomology-dim", "exact cohomology dimension differs from the target"));
  if (!j["independent"].get<bool>())
    flags.push_back(flag(kSeverityViolation, "basis-dependent", "Gram or functional matrix is singular"));
  if (j["span_equal"].is_boolean() && !j["span_equal"].get<bool>())
    flags.push_back(flag(kSeverityViolation, "span-mismatch", "constructed span differs from the kernel basis"));
  if (b.functionals && b.functional_error > tol)
    flags.push_back(flag(kSeverityViolation, "functional-structure", "functional matrix differs from the closed form"));
  j["flags"] = flags;

  if (export_fields) {
    json pos = json::array(), comp = json::array();
    for (size_t i = 0; i < b.layout.pos.size(); ++i) {
      pos.push_back(b.layout.pos[i]);
      comp.push_back(b.layout.comp[i]);
    }
    json fields = json::array();
    for (const auto& f : b.fields) fields.push_back(std::vector<double>(f.data(), f.data() + f.size()));
    j["export"] = {{"coordinates", "doubled"}, {"positions", pos}, {"components", comp}, {"fields", fields}};
  }
  (void)dom;
  return j;
}

inline json identities_json(const IdentityReport& r) {
  json rows = json::array();
  for (const auto& x : r.results) {
    json e = {{"id", x.id}, {"statement", x.statement}, {"passed", x.passed}, {"trials", x.trials}};
    if (!x.passed) e["counterexample"] = x.counterexample;
    rows.push_back(e);
  }
  return {{"seed", r.seed}, {"degree", r.degree}, {"trials", r.trials}, {"failures", r.failures()},
          {"passed", r.all_passed()}, {"results", rows}};
}

inline json poincare_suite_json(const PoincareSuiteResult& p) {
  return {{"trials", p.trials},
          {"tolerance", p.tolerance},
          {"devgrad_residual", p.devgrad},
          {"gradgrad_residual", p.gradgrad},
          {"symgrad_residual", p.symgrad},
          {"closed_exact", p.closed_exact},
          {"path_independence", p.path_independence},
          {"passed", p.passed()}};
}

inline json battery_json(const BatteryResult& b) {
  json failing = json::array();
  for (size_t i = 0; i < b.records.size(); ++i) {
    const auto& r = b.records[i];
    if (r.index_ok && r.dual_ok && r.weight_ok) continue;
    failing.push_back({{"complex", i},
                       {"dims", r.dims},
                       {"index_ok", r.index_ok},
                       {"dual_ok", r.dual_ok},
                       {"weight_ok", r.weight_ok},
                       {"report", cohomology_json(r.report)},
                       {"index_from_operator", r.index_from_operator}});
  }
  return {{"seed", b.seed},
          {"count", b.count},
          {"max_dim", b.max_dim},
          {"index_passed", b.index_passed},
          {"dual_passed", b.dual_passed},
          {"weight_passed", b.weight_passed},
          {"failures", b.failures()},
          {"failing", failing}};
}

inline json factors_json(const FactorChecks& f) {
  return {{"sigma_hermitian", f.sigma_hermitian}, {"sigma_involutive", f.sigma_involutive},
          {"U_orthogonal", f.U_orthogonal},       {"W_orthogonal", f.W_orthogonal},
          {"V_isometric", f.V_isometric},         {"V_i_Vstar", f.V_i_Vstar},
          {"coefficients_match", f.coefficients_match}, {"symbol_identity", f.symbol_identity}};
}

inline json dirac_json(const DiracEquivalence& r) {
  json j = {{"factors", factors_json(r.factors)},
            {"displayed_symbol_identity", r.displayed_symbol_identity},
            {"negative_control", r.negative_control},
            {"equal", r.equal},
            {"differing_entries", r.differing_entries},
            {"differing_blocks", r.differing_blocks},
            {"E_orthogonal", r.E_orthogonal},
            {"M_skew", r.M_skew},
            {"L_skew", r.L_skew},
            {"index_Q", r.index_Q},
            {"index_L", r.index_L},
            {"index_D", r.index_D},
            {"kernel_M", r.kernel_M},
            {"spectra_compared", r.spectra_compared},
            {"spectra_difference", r.spectra_compared ? json(r.spectra_difference) : json(nullptr)},
            {"dims", r.dims}};
  json flags = json::array();
  if (r.negative_control) {
    j["negative_control_detected"] = !r.equal;
    if (r.equal) flags.push_back(flag(kSeverityViolation, "control-undetected", "perturbed W still gives M = E L E^T"));
  } else {
    if (!r.equal) flags.push_back(flag(kSeverityViolation, "equivalence", "M differs from E L E^T"));
    if (!r.factors.all()) flags.push_back(flag(kSeverityViolation, "factors", "a unitary factor check failed"));
  }
  if (!r.displayed_symbol_identity)
    flags.push_back(flag(kSeverityInfo, "displayed-factors",
                         "the displayed U, W fail the symbol identity; the corrected signed permutations are used"));
  if (!r.M_skew || !r.L_skew || !r.E_orthogonal)
    flags.push_back(flag(kSeverityViolation, "structure", "skewness or orthogonality failed"));
  if (r.index_L != 0) flags.push_back(flag(kSeverityViolation, "index-L", "ind L != 0"));
  if (r.index_Q != r.index_D)
    flags.push_back(flag(kSeverityViolation, "index-Q", "ind Q differs from ind D"));
  if (r.spectra_compared && r.spectra_difference > 1e-10)
    flags.push_back(flag(kSeverityViolation, "spectra", "singular values of M and L differ"));
  j["flags"] = flags;
  return j;
}

inline json provenance_json(std::optional<unsigned long long> seed, const RankTolerance& tol, std::optional<int> resolution,
                            std::optional<double> runtime_s) {
  json j = {{"tolerances", {{"rank_relative", tol.relative}, {"rank_absolute", tol.absolute}}}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["resolution"] = resolution ? json(*resolution) : json(nullptr);
  if (runtime_s) j["runtime_seconds"] = *runtime_s;
  return j;
}

inline json new_document(const std::string& command) {
  return {{"schema", kReportSchema}, {"command", command}, {"flags", json::array()}};
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace fredholm
