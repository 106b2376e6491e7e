// fredholm: command-line front end. Every subcommand writes one JSON report.
//
// Exit codes: 0 all checks hold, 1 invariant violation or failed suite,
// 2 input error, 3 geometry error.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "fredholm/report.hpp"
#include "fredholm/zoo.hpp"

extern "C" void openblas_set_num_threads(int);

namespace {

using namespace fredholm;

struct DomainArgs {
  std::string named;
  std::string file;
  int resolution = 2;
};

void add_domain_options(CLI::App* app, DomainArgs& a) {
  auto* n = app->add_option("--named", a.named, "named domain: box, two-boxes, hollow-box, solid-torus, "
                                                 "torus-with-cavity, genus-2");
  auto* f = app->add_option("--file", a.file, "voxel domain file");
  n->excludes(f);
  app->add_option("--resolution,-r", a.resolution, "refinement factor per coarse voxel")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
}

struct Loaded {
  VoxelDomain coarse, fine;
  int resolution = 1;
};

Loaded load(const DomainArgs& a) {
  if (a.named.empty() && a.file.empty()) throw InputError("give --named NAME or --file PATH");
  VoxelDomain c = a.named.empty() ? load_domain(a.file) : named_domain(a.named);
  VoxelDomain f = refine(c, a.resolution);
  return {c, f, a.resolution};
}

int threads() {
  if (const char* s = std::getenv("FREDHOLM_THREADS")) {
    const int t = std::atoi(s);
    if (t >= 1) return t;
  }
  return 1;
}

struct Output {
  std::string path;
  bool timing = false;
};

void add_output_options(CLI::App* app, Output& o) {
  app->add_option("--out,-o", o.path, "write the report here instead of stdout");
  app->add_flag("--timing", o.timing, "include runtimes (reports are then no longer byte-stable)");
}

void emit(const json& doc, const Output& o) {
  const std::string text = doc.dump(2) + "\n";
  if (o.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.path);
  if (!out) throw InputError("cannot write " + o.path);
  out << text;
}

std::optional<double> runtime(const Output& o, const Stopwatch& sw) {
  if (!o.timing) return std::nullopt;
  return sw.seconds();
}

int finish(json& doc, const Output& o) {
  const bool bad = has_violation(doc);
  doc["ok"] = !bad;
  emit(doc, o);
  return bad ? 1 : 0;
}

// ---------------------------------------------------------------------------

int cmd_analyze(const DomainArgs& da, const std::string& which, double tol, const Output& o) {
  Stopwatch sw;
  const Loaded L = load(da);
  const TopologyInvariants topo = invariants(L.fine);
  std::vector<ComplexKind> kinds;
  if (which == "all")
    kinds = {ComplexKind::derham, ComplexKind::bih1, ComplexKind::bih2, ComplexKind::ela};
  else
    kinds = {parse_kind(which)};

  AnalyzeOptions opt;
  opt.tol.relative = tol;
  json doc = new_document("analyze");
  doc["domain"] = domain_json(L.coarse, L.fine, L.resolution);
  doc["topology"] = topology_json(topo);

  const int nt = threads();
  std::map<std::string, json> results;
  if (nt > 1 && kinds.size() > 1) {
    openblas_set_num_threads(1);
    std::vector<std::future<json>> jobs;
    for (auto k : kinds) jobs.push_back(std::async(std::launch::async, [&, k] { return analyze_complex(L.fine, topo, k, opt); }));
    for (size_t i = 0; i < kinds.size(); ++i) results[to_string(kinds[i])] = jobs[i].get();
  } else {
    for (auto k : kinds) results[to_string(k)] = analyze_complex(L.fine, topo, k, opt);
  }
  json complexes = json::object(), indices = json::object();
  for (auto& [name, r] : results) {
    indices[name] = r["index_D"];
    complexes[name] = std::move(r);
  }
  doc["complexes"] = complexes;
  doc["indices"] = indices;
  doc["provenance"] = provenance_json(opt.seed, opt.tol, L.resolution, runtime(o, sw));
  return finish(doc, o);
}

int cmd_identities(unsigned long long seed, int trials, int degree, bool inject, const Output& o) {
  Stopwatch sw;
  IdentityOptions io;
  io.seed = seed;
  io.trials = trials;
  io.degree = degree;
  io.inject_failure = inject;
  const IdentityReport ir = verify_identity_catalogue(io);
  const PoincareSuiteResult ps = run_poincare_suite(seed, trials, degree);

  json doc = new_document("identities");
  doc["identities"] = identities_json(ir);
  doc["poincare_maps"] = poincare_suite_json(ps);
  if (!ir.all_passed())
    doc["flags"].push_back(flag(kSeverityViolation, "identity-failure",
                                std::to_string(ir.failures()) + " catalogue entries failed"));
  if (!ps.passed())
    doc["flags"].push_back(flag(kSeverityViolation, "poincare-map", "a representation residual exceeds the tolerance"));
  doc["provenance"] = provenance_json(seed, RankTolerance{}, std::nullopt, runtime(o, sw));

  std::cerr << "suite           result  detail\n";
  std::cerr << "identities      " << (ir.all_passed() ? "pass  " : "FAIL  ") << "  " << ir.results.size() - ir.failures()
            << "/" << ir.results.size() << " entries, " << trials << " trials, degree " << degree << "\n";
  std::cerr << "poincare-maps   " << (ps.passed() ? "pass  " : "FAIL  ") << "  worst residual "
            << std::max({ps.devgrad, ps.gradgrad, ps.symgrad}) << "\n";
  std::cerr << "closed-loops    " << (ps.closed_exact <= ps.tolerance ? "pass  " : "FAIL  ") << "  worst integral "
            << ps.closed_exact << "\n";
  for (const auto& r : ir.results)
    if (!r.passed) std::cerr << "  failed " << r.id << ": " << r.statement << "\n";
  return finish(doc, o);
}

int cmd_random_complex(unsigned long long seed, int count, int max_dim, double tol, const Output& o) {
  Stopwatch sw;
  RankTolerance rt;
  rt.relative = tol;
  const BatteryResult b = random_complex_battery(seed, count, max_dim, rt);
  json doc = new_document("random-complex");
  doc["battery"] = battery_json(b);
  if (b.failures())
    doc["flags"].push_back(flag(kSeverityViolation, "battery", std::to_string(b.failures()) + " complexes failed"));
  doc["provenance"] = provenance_json(seed, rt, std::nullopt, runtime(o, sw));
  return finish(doc, o);
}

int cmd_basis(const DomainArgs& da, const std::string& kind, const std::string& which, bool exp, int collar,
              const Output& o) {
  Stopwatch sw;
  const Loaded L = load(da);
  const TopologyInvariants topo = invariants(L.fine);
  BasisOptions bo;
  bo.collar = collar;
  const BasisSet b = build_basis(L.fine, parse_kind(kind), parse_basis_kind(which), bo);
  json doc = new_document("basis");
  doc["domain"] = domain_json(L.coarse, L.fine, L.resolution);
  doc["topology"] = topology_json(topo);
  doc["basis"] = basis_json(L.fine, b, exp, bo.tol);
  doc["provenance"] = provenance_json(std::nullopt, RankTolerance{}, L.resolution, runtime(o, sw));
  return finish(doc, o);
}

int cmd_dirac(const DomainArgs& da, bool negative, const Output& o) {
  Stopwatch sw;
  const Loaded L = load(da);
  DiracOptions dop;
  dop.negative_control = negative;
  const DiracEquivalence r = unitary_equivalence_check(L.fine, dop);
  json doc = new_document("dirac");
  doc["domain"] = domain_json(L.coarse, L.fine, L.resolution);
  doc["topology"] = topology_json(invariants(L.fine));
  doc["dirac"] = dirac_json(r);
  doc["provenance"] = provenance_json(std::nullopt, RankTolerance{}, L.resolution, runtime(o, sw));
  return finish(doc, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fredholm indices and cohomology of Hilbert complexes on voxel domains"};
  app.require_subcommand(1);

  DomainArgs da;
  Output out;

  std::string complex_kind = "all";
  double tol = 1e-9;
  auto* analyze = app.add_subcommand("analyze", "dimensions, indices and constants of the four complexes");
  add_domain_options(analyze, da);
  add_output_options(analyze, out);
  analyze->add_option("--complex", complex_kind, "derham, bih1, bih2, ela or all")
      ->check(CLI::IsMember({"derham", "bih1", "bih2", "ela", "all"}))
      ->capture_default_str();
  analyze->add_option("--tol", tol, "relative singular value threshold of the floating route")->capture_default_str();

  unsigned long long seed = 1;
  int trials = 100, degree = 3;
  bool inject = false;
  auto* ident = app.add_subcommand("identities", "identity catalogue and Poincare-map suites");
  add_output_options(ident, out);
  ident->add_option("--seed", seed)->capture_default_str();
  ident->add_option("--trials", trials)->check(CLI::PositiveNumber)->capture_default_str();
  ident->add_option("--degree", degree)->check(CLI::Range(0, 3))->capture_default_str();
  ident->add_flag("--inject-failure", inject, "add a deliberately wrong identity");

  int count = 200, max_dim = 12;
  auto* rnd = app.add_subcommand("random-complex", "property battery on seeded random complexes");
  add_output_options(rnd, out);
  rnd->add_option("--seed", seed)->capture_default_str();
  rnd->add_option("--count", count)->check(CLI::NonNegativeNumber)->capture_default_str();
  rnd->add_option("--max-dim", max_dim)->check(CLI::NonNegativeNumber)->capture_default_str();
  rnd->add_option("--tol", tol)->capture_default_str();

  std::string basis_kind = "derham", which = "dirichlet";
  bool exp = false;
  int collar = 1;
  auto* basis = app.add_subcommand("basis", "explicit Dirichlet or Neumann cohomology bases");
  add_domain_options(basis, da);
  add_output_options(basis, out);
  basis->add_option("--complex", basis_kind)->check(CLI::IsMember({"derham", "bih1", "bih2", "ela"}))->capture_default_str();
  basis->add_option("--which", which)->check(CLI::IsMember({"dirichlet", "neumann"}))->capture_default_str();
  basis->add_flag("--export", exp, "include the fields as per-node component arrays");
  basis->add_option("--collar", collar, "cutoff width in voxels")->check(CLI::Range(1, 8))->capture_default_str();

  bool negative = false;
  auto* dirac = app.add_subcommand("dirac", "unitary equivalence of the extended Maxwell and Dirac operators");
  add_domain_options(dirac, da);
  add_output_options(dirac, out);
  dirac->add_flag("--negative-control", negative, "flip one sign in W; the mismatch must be detected");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return cmd_analyze(da, complex_kind, tol, out);
    if (*ident) return cmd_identities(seed, trials, degree, inject, out);
    if (*rnd) return cmd_random_complex(seed, count, max_dim, tol, out);
    if (*basis) return cmd_basis(da, basis_kind, which, exp, collar, out);
    if (*dirac) return cmd_dirac(da, negative, out);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return 3;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
