#pragma once

// Exact trivariate polynomials over Q and polynomial scalar, vector and
// 3x3 tensor fields with the pointwise and differential operators.
//
// Conventions: (Grad v)_ij = d_j v_i, Curl and Div act row-wise:
// (Curl T)_ij = eps_jkl d_k T_il, (Div T)_i = d_j T_ij.

#include <boost/rational.hpp>

#include <array>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace fredholm {

using Rational = boost::rational<long long>;
using Exponent = std::array<int, 3>;

class Polynomial3 {
 public:
  Polynomial3() = default;
  Polynomial3(long long c) {  // NOLINT: constants convert implicitly
    if (c) terms_[{0, 0, 0}] = Rational(c);
  }
  Polynomial3(Rational c) {  // NOLINT
    if (c.numerator() != 0) terms_[{0, 0, 0}] = c;
  }

  static Polynomial3 monomial(Exponent e, Rational c = 1) {
    Polynomial3 p;
    if (c.numerator() != 0) p.terms_[e] = c;
    return p;
  }
  static Polynomial3 coord(int i) {
    Exponent e{0, 0, 0};
    e[size_t(i)] = 1;
    return monomial(e);
  }

  const std::map<Exponent, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
    return d;
  }

  Polynomial3& operator+=(const Polynomial3& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial3& operator-=(const Polynomial3& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial3& operator*=(Rational s) {
    if (s.numerator() == 0) terms_.clear();
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial3 operator+(Polynomial3 a, const Polynomial3& b) { return a += b; }
  friend Polynomial3 operator-(Polynomial3 a, const Polynomial3& b) { return a -= b; }
  friend Polynomial3 operator-(Polynomial3 a) { return a *= Rational(-1); }
  friend Polynomial3 operator*(Polynomial3 a, Rational s) { return a *= s; }
  friend Polynomial3 operator*(Rational s, Polynomial3 a) { return a *= s; }
  friend Polynomial3 operator*(const Polynomial3& a, const Polynomial3& b) {
    Polynomial3 r;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
    return r;
  }
  friend bool operator==(const Polynomial3& a, const Polynomial3& b) { return a.terms_ == b.terms_; }

  Polynomial3 derivative(int i) const {
    Polynomial3 r;
    for (const auto& [e, c] : terms_) {
      if (e[size_t(i)] == 0) continue;
      Exponent f = e;
      f[size_t(i)] -= 1;
      r.add_term(f, c * Rational(e[size_t(i)]));
    }
    return r;
  }

  double eval(const std::array<double, 3>& x) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = double(c.numerator()) / double(c.denominator());
      for (size_t k = 0; k < 3; ++k)
        for (int p = 0; p < e[k]; ++p) t *= x[k];
      s += t;
    }
    return s;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << c;
      const char* names[3] = {"x1", "x2", "x3"};
      for (size_t k = 0; k < 3; ++k)
        if (e[k]) os << '*' << names[k] << (e[k] > 1 ? "^" + std::to_string(e[k]) : "");
    }
    return os.str();
  }

 private:
  void add_term(const Exponent& e, const Rational& c) {
    if (c.numerator() == 0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, c);
      return;
    }
    it->second += c;
    if (it->second.numerator() == 0) terms_.erase(it);
  }
  std::map<Exponent, Rational> terms_;
};

enum class FieldShape { scalar, vector, tensor };

// components: 1 (scalar), 3 (vector) or 9 row-major (tensor)
struct PolynomialField {
  FieldShape shape = FieldShape::scalar;
  std::vector<Polynomial3> c{Polynomial3()};

  static PolynomialField scalar(Polynomial3 u) { return {FieldShape::scalar, {std::move(u)}}; }
  static PolynomialField vector(std::array<Polynomial3, 3> v) { return {FieldShape::vector, {v[0], v[1], v[2]}}; }
  static PolynomialField zero(FieldShape s) {
    return {s, std::vector<Polynomial3>(s == FieldShape::scalar ? 1 : s == FieldShape::vector ? 3 : 9)};
  }

  const Polynomial3& operator[](int i) const { return c[size_t(i)]; }
  Polynomial3& operator[](int i) { return c[size_t(i)]; }
  const Polynomial3& operator()(int i, int j) const { return c[size_t(3 * i + j)]; }
  Polynomial3& operator()(int i, int j) { return c[size_t(3 * i + j)]; }

  bool is_zero() const {
    for (const auto& p : c)
      if (!p.is_zero()) return false;
    return true;
  }
  int degree() const {
    int d = -1;
    for (const auto& p : c) d = std::max(d, p.degree());
    return d;
  }
  std::vector<double> eval(const std::array<double, 3>& x) const {
    std::vector<double> out;
    for (const auto& p : c) out.push_back(p.eval(x));
    return out;
  }

  friend PolynomialField operator+(PolynomialField a, const PolynomialField& b) {
    same(a, b);
    for (size_t i = 0; i < a.c.size(); ++i) a.c[i] += b.c[i];
    return a;
  }
  friend PolynomialField operator-(PolynomialField a, const PolynomialField& b) {
    same(a, b);
    for (size_t i = 0; i < a.c.size(); ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend PolynomialField operator*(Rational s, PolynomialField a) {
    for (auto& p : a.c) p *= s;
    return a;
  }
  friend PolynomialField operator-(PolynomialField a) { return Rational(-1) * std::move(a); }
  friend bool operator==(const PolynomialField& a, const PolynomialField& b) { return a.shape == b.shape && a.c == b.c; }

  std::string str() const {
    std::string s = "[";
    for (size_t i = 0; i < c.size(); ++i) s += (i ? ", " : "") + c[i].str();
    return s + "]";
  }

 private:
  static void same(const PolynomialField& a, const PolynomialField& b) {
    if (a.shape != b.shape) throw InputError("field shape mismatch");
  }
};

namespace fields {

inline void expect(const PolynomialField& f, FieldShape s, const char* op) {
  if (f.shape != s) throw InputError(std::string(op) + ": wrong field shape");
}

inline int eps(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

inline PolynomialField spn(const PolynomialField& v) {
  expect(v, FieldShape::vector, "spn");
  PolynomialField t = PolynomialField::zero(FieldShape::tensor);
  t(0, 1) = -v[2];
  t(0, 2) = v[1];
  t(1, 0) = v[2];
  t(1, 2) = -v[0];
  t(2, 0) = -v[1];
  t(2, 1) = v[0];
  return t;
}

inline PolynomialField transpose(const PolynomialField& t) {
  expect(t, FieldShape::tensor, "transpose");
  PolynomialField r = PolynomialField::zero(FieldShape::tensor);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = t(j, i);
  return r;
}

inline PolynomialField sym(const PolynomialField& t) { return Rational(1, 2) * (t + transpose(t)); }
inline PolynomialField skw(const PolynomialField& t) { return Rational(1, 2) * (t - transpose(t)); }

inline PolynomialField tr(const PolynomialField& t) {
  expect(t, FieldShape::tensor, "tr");
  return PolynomialField::scalar(t(0, 0) + t(1, 1) + t(2, 2));
}

inline PolynomialField times_id(const PolynomialField& u) {
  expect(u, FieldShape::scalar, "id");
  PolynomialField r = PolynomialField::zero(FieldShape::tensor);
  for (int i = 0; i < 3; ++i) r(i, i) = u[0];
  return r;
}

inline PolynomialField dev(const PolynomialField& t) { return t - Rational(1, 3) * times_id(tr(t)); }

inline PolynomialField spn_inv(const PolynomialField& t) {
  expect(t, FieldShape::tensor, "spn_inv");
  if (!sym(t).is_zero()) throw InputError("spn_inv: argument is not skew-symmetric");
  return PolynomialField::vector({t(2, 1), t(0, 2), t(1, 0)});
}

// (S v)_i = S_ij v_j
inline PolynomialField apply(const PolynomialField& s, const PolynomialField& v) {
  expect(s, FieldShape::tensor, "apply");
  expect(v, FieldShape::vector, "apply");
  PolynomialField r = PolynomialField::zero(FieldShape::vector);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += s(i, j) * v[j];
  return r;
}

inline PolynomialField matmul(const PolynomialField& a, const PolynomialField& b) {
  expect(a, FieldShape::tensor, "matmul");
  expect(b, FieldShape::tensor, "matmul");
  PolynomialField r = PolynomialField::zero(FieldShape::tensor);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r(i, j) += a(i, k) * b(k, j);
  return r;
}

inline PolynomialField cross(const PolynomialField& v, const PolynomialField& w) {
  expect(v, FieldShape::vector, "cross");
  expect(w, FieldShape::vector, "cross");
  PolynomialField r = PolynomialField::zero(FieldShape::vector);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        if (eps(i, j, k)) r[i] += Rational(eps(i, j, k)) * (v[j] * w[k]);
  return r;
}

inline PolynomialField grad(const PolynomialField& u) {
  expect(u, FieldShape::scalar, "grad");
  return PolynomialField::vector({u[0].derivative(0), u[0].derivative(1), u[0].derivative(2)});
}

inline PolynomialField div(const PolynomialField& v) {
  expect(v, FieldShape::vector, "div");
  return PolynomialField::scalar(v[0].derivative(0) + v[1].derivative(1) + v[2].derivative(2));
}

inline PolynomialField curl(const PolynomialField& v) {
  expect(v, FieldShape::vector, "curl");
  return PolynomialField::vector({v[2].derivative(1) - v[1].derivative(2), v[0].derivative(2) - v[2].derivative(0),
                                  v[1].derivative(0) - v[0].derivative(1)});
}

inline PolynomialField Grad(const PolynomialField& v) {
  expect(v, FieldShape::vector, "Grad");
  PolynomialField t = PolynomialField::zero(FieldShape::tensor);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = v[i].derivative(j);
  return t;
}

inline PolynomialField row(const PolynomialField& t, int i) {
  return PolynomialField::vector({t(i, 0), t(i, 1), t(i, 2)});
}

inline PolynomialField Curl(const PolynomialField& t) {
  expect(t, FieldShape::tensor, "Curl");
  PolynomialField r = PolynomialField::zero(FieldShape::tensor);
  for (int i = 0; i < 3; ++i) {
    PolynomialField c = curl(row(t, i));
    for (int j = 0; j < 3; ++j) r(i, j) = c[j];
  }
  return r;
}

inline PolynomialField Div(const PolynomialField& t) {
  expect(t, FieldShape::tensor, "Div");
  PolynomialField r = PolynomialField::zero(FieldShape::vector);
  for (int i = 0; i < 3; ++i) r[i] = div(row(t, i))[0];
  return r;
}

inline PolynomialField Gradgrad(const PolynomialField& u) { return Grad(grad(u)); }
inline PolynomialField devGrad(const PolynomialField& v) { return dev(Grad(v)); }
inline PolynomialField symGrad(const PolynomialField& v) { return sym(Grad(v)); }
inline PolynomialField symCurl(const PolynomialField& t) { return sym(Curl(t)); }
inline PolynomialField divDiv(const PolynomialField& s) { return div(Div(s)); }
inline PolynomialField CurlCurlT(const PolynomialField& s) { return Curl(transpose(Curl(s))); }

// name-based dispatch used by the CLI and tests
inline PolynomialField apply_operator(const std::string& op, const PolynomialField& f) {
  if (op == "grad") return grad(f);
  if (op == "div") return div(f);
  if (op == "curl") return curl(f);
  if (op == "Grad") return Grad(f);
  if (op == "Curl") return Curl(f);
  if (op == "Div") return Div(f);
  if (op == "Gradgrad") return Gradgrad(f);
  if (op == "devGrad") return devGrad(f);
  if (op == "symGrad") return symGrad(f);
  if (op == "symCurl") return symCurl(f);
  if (op == "divDiv") return divDiv(f);
  if (op == "CurlCurlT") return CurlCurlT(f);
  throw InputError("unknown differential operator '" + op + "'");
}

}  // namespace fields

// Integer coefficients uniform in [-5, 5] on every monomial of degree <= deg.
inline Polynomial3 random_polynomial(std::mt19937_64& rng, int deg) {
  std::uniform_int_distribution<int> coef(-5, 5);
  Polynomial3 p;
  for (int a = 0; a <= deg; ++a)
    for (int b = 0; a + b <= deg; ++b)
      for (int c = 0; a + b + c <= deg; ++c) p += Polynomial3::monomial({a, b, c}, Rational(coef(rng)));
  return p;
}

inline PolynomialField random_field(std::mt19937_64& rng, FieldShape s, int deg) {
  PolynomialField f = PolynomialField::zero(s);
  for (auto& p : f.c) p = random_polynomial(rng, deg);
  return f;
}

}  // namespace fredholm
