#pragma once

// Matrix-calculus identity catalogue, checked as exact polynomial identities:
// each entry returns lhs - rhs, which must be the zero field.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"

namespace fredholm {

struct IdentityInputs {
  PolynomialField u, v, w, S;
};

struct Identity {
  std::string id;
  std::string statement;
  std::function<PolynomialField(const IdentityInputs&)> difference;
};

struct IdentityResult {
  std::string id;
  std::string statement;
  bool passed = true;
  int trials = 0;
  std::string counterexample;  // inputs and nonzero difference of the first failure
};

struct IdentityReport {
  unsigned long long seed = 0;
  int degree = 0;
  int trials = 0;
  std::vector<IdentityResult> results;

  bool all_passed() const {
    for (const auto& r : results)
      if (!r.passed) return false;
    return true;
  }
  int failures() const {
    int n = 0;
    for (const auto& r : results) n += r.passed ? 0 : 1;
    return n;
  }
};

inline std::vector<Identity> identity_catalogue() {
  using namespace fields;
  using F = PolynomialField;
  using In = IdentityInputs;
  const Rational two(2), three(3), half(1, 2);
  std::vector<Identity> c;
  auto add = [&](std::string id, std::string st, std::function<F(const In&)> f) {
    c.push_back({std::move(id), std::move(st), std::move(f)});
  };

  add("spn-cross", "(spn v)w = v x w = -(spn w)v", [](const In& a) {
    return (apply(spn(a.v), a.w) - cross(a.v, a.w)) + (apply(spn(a.w), a.v) + cross(a.v, a.w));
  });
  add("spn-skew-product", "(spn v)(spn^-1 K) = -K v for skew K", [](const In& a) {
    const F K = spn(a.w);
    return apply(spn(a.v), spn_inv(K)) + apply(K, a.v);
  });
  add("spn-roundtrip", "spn^-1 spn v = v", [](const In& a) { return spn_inv(spn(a.v)) - a.v; });
  add("sym-spn", "sym spn v = 0", [](const In& a) { return sym(spn(a.v)); });
  add("dev-id", "dev(u id) = 0", [](const In& a) { return dev(times_id(a.u)); });
  add("tr-Grad", "tr Grad v = div v", [](const In& a) { return tr(Grad(a.v)) - div(a.v); });
  add("skw-Grad", "2 skw Grad v = spn curl v", [=](const In& a) { return two * skw(Grad(a.v)) - spn(curl(a.v)); });
  add("Div-id", "Div(u id) = grad u", [](const In& a) { return Div(times_id(a.u)) - grad(a.u); });
  add("Curl-id", "Curl(u id) = -spn grad u", [](const In& a) { return Curl(times_id(a.u)) + spn(grad(a.u)); });
  add("curl-Div-id", "curl Div(u id) = 0", [](const In& a) { return curl(Div(times_id(a.u))); });
  add("curl-spninv-Curl-id", "curl spn^-1 Curl(u id) = 0",
      [](const In& a) { return curl(spn_inv(Curl(times_id(a.u)))); });
  add("symCurl-id", "sym Curl(u id) = 0", [](const In& a) { return sym(Curl(times_id(a.u))); });
  add("Div-spn", "Div spn v = -curl v", [](const In& a) { return Div(spn(a.v)) + curl(a.v); });
  add("Div-skw", "Div skw S = -curl spn^-1 skw S",
      [](const In& a) { return Div(skw(a.S)) + curl(spn_inv(skw(a.S))); });
  add("divDiv-skw", "div Div skw S = 0", [](const In& a) { return div(Div(skw(a.S))); });
  add("Curl-spn", "Curl spn v = (div v) id - (Grad v)^T",
      [](const In& a) { return Curl(spn(a.v)) - times_id(div(a.v)) + transpose(Grad(a.v)); });
  add("Curl-skw", "Curl skw S = (div spn^-1 skw S) id - (Grad spn^-1 skw S)^T", [](const In& a) {
    const F q = spn_inv(skw(a.S));
    return Curl(skw(a.S)) - times_id(div(q)) + transpose(Grad(q));
  });
  add("devCurl-spn", "dev Curl spn v = -(dev Grad v)^T",
      [](const In& a) { return dev(Curl(spn(a.v))) + transpose(dev(Grad(a.v))); });
  add("Curl-symGrad", "-2 Curl sym Grad v = 2 Curl skw Grad v = -(Grad curl v)^T", [=](const In& a) {
    const F r = -transpose(Grad(curl(a.v)));
    return (-two * Curl(sym(Grad(a.v))) - r) + (two * Curl(skw(Grad(a.v))) - r);
  });
  add("skwCurl", "2 spn^-1 skw Curl S = Div S^T - grad tr S = Div(S - tr S id)^T", [=](const In& a) {
    const F l = two * spn_inv(skw(Curl(a.S)));
    return (l - (Div(transpose(a.S)) - grad(tr(a.S)))) + (l - Div(transpose(a.S - times_id(tr(a.S)))));
  });
  add("curlDivT", "curl Div S^T = 2 curl spn^-1 skw Curl S",
      [=](const In& a) { return curl(Div(transpose(a.S))) - two * curl(spn_inv(skw(Curl(a.S)))); });
  add("skwCurl-dev", "2 skw Curl S = spn Div S^T if tr S = 0", [=](const In& a) {
    const F S0 = dev(a.S);
    return two * skw(Curl(S0)) - spn(Div(transpose(S0)));
  });
  add("trCurl", "tr Curl S = 2 div spn^-1 skw S",
      [=](const In& a) { return tr(Curl(a.S)) - two * div(spn_inv(skw(a.S))); });
  add("trCurl-sym-skw", "tr Curl sym S = 0 and tr Curl skw S = tr Curl S",
      [](const In& a) { return tr(Curl(sym(a.S))) + (tr(Curl(skw(a.S))) - tr(Curl(a.S))); });
  add("Grad-spninv-skw", "2 (Grad spn^-1 skw S)^T = (tr Curl skw S) id - 2 Curl skw S", [=](const In& a) {
    return two * transpose(Grad(spn_inv(skw(a.S)))) - times_id(tr(Curl(skw(a.S)))) + two * Curl(skw(a.S));
  });
  add("Div-devGrad", "3 Div(dev Grad v)^T = 2 grad div v",
      [=](const In& a) { return three * Div(transpose(dev(Grad(a.v)))) - two * grad(div(a.v)); });
  add("Curl-symGrad-2", "2 Curl sym Grad v = -Curl spn curl v = (Grad curl v)^T", [=](const In& a) {
    const F r = transpose(Grad(curl(a.v)));
    return (two * Curl(sym(Grad(a.v))) - r) + (-Curl(spn(curl(a.v))) - r);
  });
  add("Div-symCurl", "2 Div sym Curl S = -2 Div skw Curl S = curl Div S^T", [=](const In& a) {
    const F r = curl(Div(transpose(a.S)));
    return (two * Div(sym(Curl(a.S))) - r) + (-two * Div(skw(Curl(a.S))) - r);
  });
  add("CurlCurlT-sym", "Curl(Curl sym S)^T = sym Curl(Curl S)^T",
      [](const In& a) { return Curl(transpose(Curl(sym(a.S)))) - sym(Curl(transpose(Curl(a.S)))); });
  add("CurlCurlT-skw", "Curl(Curl skw S)^T = skw Curl(Curl S)^T",
      [](const In& a) { return Curl(transpose(Curl(skw(a.S)))) - skw(Curl(transpose(Curl(a.S)))); });

  // complex properties of the three elasticity-type sequences and de Rham
  add("complex-Curl-Gradgrad", "Curl Gradgrad u = 0", [](const In& a) { return Curl(Gradgrad(a.u)); });
  add("complex-symCurl-devGrad", "sym Curl dev Grad v = 0", [](const In& a) { return symCurl(devGrad(a.v)); });
  add("complex-divDiv-symCurl", "div Div sym Curl T = 0 for trace-free T",
      [](const In& a) { return divDiv(symCurl(dev(a.S))); });
  add("complex-divDiv-Curl", "div Div Curl S = 0 for symmetric S", [](const In& a) { return divDiv(Curl(sym(a.S))); });
  add("complex-Div-Curl", "Div Curl S = 0", [](const In& a) { return Div(Curl(a.S)); });
  add("complex-CurlCurlT-symGrad", "Curl (Curl sym Grad v)^T = 0", [](const In& a) { return CurlCurlT(symGrad(a.v)); });
  add("complex-Div-CurlCurlT", "Div Curl (Curl S)^T = 0 for symmetric S",
      [](const In& a) { return Div(CurlCurlT(sym(a.S))); });
  add("complex-curl-grad", "curl grad u = 0", [](const In& a) { return curl(grad(a.u)); });
  add("complex-div-curl", "div curl v = 0", [](const In& a) { return div(curl(a.v)); });
  add("sym-trace-free-range", "devGrad v is trace free and symCurl T is symmetric", [](const In& a) {
    const F t = symCurl(dev(a.S));
    return times_id(tr(devGrad(a.v))) + (t - transpose(t));
  });
  return c;
}

// Deliberately wrong entry for self-tests of the failure path.
inline Identity injected_failure() {
  return {"injected-sign-error", "Div spn v = +curl v",
          [](const IdentityInputs& a) { return fields::Div(fields::spn(a.v)) - fields::curl(a.v); }};
}

struct IdentityOptions {
  unsigned long long seed = 1;
  int degree = 3;
  int trials = 20;
  bool inject_failure = false;
};

inline std::string describe_inputs(const IdentityInputs& a) {
  return "u = " + a.u.str() + "; v = " + a.v.str() + "; w = " + a.w.str() + "; S = " + a.S.str();
}

inline IdentityReport verify_identity_catalogue(const IdentityOptions& opt = {}) {
  if (opt.trials < 1) throw InputError("identities: trials must be at least 1");
  if (opt.degree < 0 || opt.degree > 3) throw InputError("identities: degree must be in [0, 3]");
  auto cat = identity_catalogue();
  if (opt.inject_failure) cat.push_back(injected_failure());

  IdentityReport rep;
  rep.seed = opt.seed;
  rep.degree = opt.degree;
  rep.trials = opt.trials;
  for (const auto& id : cat) rep.results.push_back({id.id, id.statement, true, 0, {}});

  std::mt19937_64 rng(opt.seed);
  for (int t = 0; t < opt.trials; ++t) {
    IdentityInputs in{random_field(rng, FieldShape::scalar, opt.degree), random_field(rng, FieldShape::vector, opt.degree),
                      random_field(rng, FieldShape::vector, opt.degree), random_field(rng, FieldShape::tensor, opt.degree)};
    for (size_t k = 0; k < cat.size(); ++k) {
      auto& r = rep.results[k];
      ++r.trials;
      const PolynomialField d = cat[k].difference(in);
      if (!d.is_zero() && r.passed) {
        r.passed = false;
        r.counterexample = describe_inputs(in) + "; difference = " + d.str();
      }
    }
  }
  return rep;
}

}  // namespace fredholm
