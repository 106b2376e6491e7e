#pragma once

// Curve integrals along polylines, the three Poincare-map representation
// identities, and the loop functionals beta used to certify Neumann bases.
//
// Tensor line integrals act row-wise: (int T dl)_i = int <row_i T, dl>.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"
#include "tensor.hpp"

namespace fredholm {

using Point3 = std::array<double, 3>;

struct PiecewisePath {
  std::vector<Point3> vertices;
  bool closed = false;

  static PiecewisePath open(std::vector<Point3> v) {
    PiecewisePath p{std::move(v), false};
    p.validate();
    return p;
  }
  static PiecewisePath loop(std::vector<Point3> v) {
    if (!v.empty() && v.front() != v.back()) v.push_back(v.front());
    PiecewisePath p{std::move(v), true};
    p.validate();
    return p;
  }

  void validate() const {
    if (vertices.size() < 2) throw InputError("path needs at least two vertices");
    for (size_t i = 0; i + 1 < vertices.size(); ++i)
      if (vertices[i] == vertices[i + 1]) throw InputError("degenerate path segment " + std::to_string(i));
    if (closed && vertices.front() != vertices.back()) throw InputError("closed path must end at its start");
  }
  int segments() const { return int(vertices.size()) - 1; }
  const Point3& start() const { return vertices.front(); }
  const Point3& end() const { return vertices.back(); }
};

namespace detail {

struct GaussRule {
  std::array<double, 5> t, w;  // on [0, 1]
};

inline const GaussRule& gauss5() {
  static const GaussRule r = [] {
    const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                         0.2369268850561891};
    GaussRule g{};
    for (int i = 0; i < 5; ++i) {
      g.t[size_t(i)] = 0.5 * (x[i] + 1.0);
      g.w[size_t(i)] = 0.5 * w[i];
    }
    return g;
  }();
  return r;
}

inline Point3 lerp(const Point3& a, const Point3& b, double t) {
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
}

inline Eigen::Vector3d vec(const Point3& p) { return {p[0], p[1], p[2]}; }

// Generic quadrature over the path: f(y, dl) with dl the segment tangent
// (so the weight is folded in), accumulated into R.
template <class R, class F>
R integrate(const PiecewisePath& p, R zero, F f, int seg_limit = -1, double t_limit = 1.0) {
  const auto& g = gauss5();
  const int nseg = seg_limit < 0 ? p.segments() : seg_limit + 1;
  for (int s = 0; s < nseg; ++s) {
    const Point3& a = p.vertices[size_t(s)];
    const Point3& b = p.vertices[size_t(s) + 1];
    const double len = (s == seg_limit) ? t_limit : 1.0;
    if (len == 0.0) continue;
    const Eigen::Vector3d d = (vec(b) - vec(a)) * len;
    for (size_t q = 0; q < 5; ++q) {
      const Point3 y = lerp(a, b, g.t[q] * len);
      zero += f(y, Eigen::Vector3d(g.w[q] * d));
    }
  }
  return zero;
}

inline Eigen::Matrix3d tensor_at(const PolynomialField& t, const Point3& y) {
  const auto v = t.eval(y);
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[size_t(3 * i + j)];
  return m;
}

inline Eigen::Vector3d vector_at(const PolynomialField& v, const Point3& y) {
  const auto e = v.eval(y);
  return {e[0], e[1], e[2]};
}

inline Eigen::Matrix3d spn(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v[2], v[1], v[2], 0, -v[0], -v[1], v[0], 0;
  return m;
}

}  // namespace detail

// int <f, dl> for a vector field f
inline double line_integral_vector(const PolynomialField& f, const PiecewisePath& p) {
  fields::expect(f, FieldShape::vector, "line_integral");
  return detail::integrate(p, 0.0, [&](const Point3& y, const Eigen::Vector3d& dl) {
    return detail::vector_at(f, y).dot(dl);
  });
}

// int T dl (row-wise) for a tensor field, int u dl for a scalar field
inline Eigen::Vector3d line_integral_rows(const PolynomialField& t, const PiecewisePath& p) {
  if (t.shape == FieldShape::vector) throw InputError("line_integral_rows: expects tensor or scalar field");
  return detail::integrate(p, Eigen::Vector3d::Zero().eval(), [&](const Point3& y, const Eigen::Vector3d& dl) {
    if (t.shape == FieldShape::scalar) return Eigen::Vector3d(t.c[0].eval(y) * dl);
    return Eigen::Vector3d(detail::tensor_at(t, y) * dl);
  });
}

// int (x - y) <f(y), dl_y>
inline Eigen::Vector3d weighted_integral(const PolynomialField& f, const PiecewisePath& p, const Point3& x) {
  fields::expect(f, FieldShape::vector, "weighted_integral");
  const Eigen::Vector3d xv = detail::vec(x);
  return detail::integrate(p, Eigen::Vector3d::Zero().eval(), [&](const Point3& y, const Eigen::Vector3d& dl) {
    return Eigen::Vector3d((xv - detail::vec(y)) * detail::vector_at(f, y).dot(dl));
  });
}

// int <x - y, S(y) dl_y>
inline double weighted_tensor_integral(const PolynomialField& s, const PiecewisePath& p, const Point3& x) {
  fields::expect(s, FieldShape::tensor, "weighted_tensor_integral");
  const Eigen::Vector3d xv = detail::vec(x);
  return detail::integrate(p, 0.0, [&](const Point3& y, const Eigen::Vector3d& dl) {
    return (xv - detail::vec(y)).dot(detail::tensor_at(s, y) * dl);
  });
}

// int spn(C(y) dl_y) (x - y)
inline Eigen::Vector3d spn_weighted_integral(const PolynomialField& c, const PiecewisePath& p, const Point3& x) {
  fields::expect(c, FieldShape::tensor, "spn_weighted_integral");
  const Eigen::Vector3d xv = detail::vec(x);
  return detail::integrate(p, Eigen::Vector3d::Zero().eval(), [&](const Point3& y, const Eigen::Vector3d& dl) {
    return Eigen::Vector3d(detail::spn(detail::tensor_at(c, y) * dl) * (xv - detail::vec(y)));
  });
}

namespace detail {

// Nested integral int_{y on p} g(int_{x0}^{y} inner, dl_y): inner integrals
// are taken along the same path up to y.
template <class Inner, class Outer, class R>
R nested_integral(const PiecewisePath& p, Inner inner_integrand, Outer outer, R zero) {
  const auto& g = gauss5();
  for (int s = 0; s < p.segments(); ++s) {
    const Point3& a = p.vertices[size_t(s)];
    const Point3& b = p.vertices[size_t(s) + 1];
    const Eigen::Vector3d d = vec(b) - vec(a);
    for (size_t q = 0; q < 5; ++q) {
      const Point3 y = lerp(a, b, g.t[q]);
      using In = decltype(inner_integrand(y, d));
      In init{};
      if constexpr (!std::is_arithmetic_v<In>) init.setZero();
      const In in = integrate(p, init, inner_integrand, s, g.t[q]);
      zero += outer(in, Eigen::Vector3d(g.w[q] * d));
    }
  }
  return zero;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

struct RepresentationResidual {
  double value = 0;       // potential identity
  double derivative = 0;  // derivative identity (div v, grad u or curl v)
  double swap = 0;        // double integral against its single-integral form

  double max() const { return std::max(value, std::max(derivative, swap)); }
};

// v(x) - v(x0) - div v(x0)(x - x0)/3 = int T dl + 1/2 int (x - y)<Div T^T, dl>,
// div v(x) - div v(x0) = 3/2 int <Div T^T, dl>, with T = devGrad v.
inline RepresentationResidual check_devgrad_representation(const PolynomialField& v, const PiecewisePath& p) {
  using namespace fields;
  expect(v, FieldShape::vector, "devgrad representation");
  const PolynomialField T = devGrad(v);
  const PolynomialField q = Div(transpose(T));
  const PolynomialField dv = div(v);
  const Point3 &x0 = p.start(), &x = p.end();
  const Eigen::Vector3d dx = detail::vec(x) - detail::vec(x0);

  RepresentationResidual r;
  const Eigen::Vector3d lhs =
      detail::vector_at(v, x) - detail::vector_at(v, x0) - dv.c[0].eval(x0) / 3.0 * dx;
  const Eigen::Vector3d rhs = line_integral_rows(T, p) + 0.5 * weighted_integral(q, p, x);
  r.value = detail::max_abs(lhs - rhs);
  r.derivative = std::abs(dv.c[0].eval(x) - dv.c[0].eval(x0) - 1.5 * line_integral_vector(q, p));

  const Eigen::Vector3d nested = detail::nested_integral(
      p, [&](const Point3& y, const Eigen::Vector3d& dl) { return detail::vector_at(q, y).dot(dl); },
      [](double in, const Eigen::Vector3d& dl) { return Eigen::Vector3d(in * dl); }, Eigen::Vector3d::Zero().eval());
  r.swap = detail::max_abs(nested - weighted_integral(q, p, x));
  return r;
}

// u(x) - u(x0) - <grad u(x0), x - x0> = int <x - y, S dl>,
// grad u(x) - grad u(x0) = int S dl, with S = Gradgrad u.
inline RepresentationResidual check_gradgrad_representation(const PolynomialField& u, const PiecewisePath& p) {
  using namespace fields;
  expect(u, FieldShape::scalar, "gradgrad representation");
  const PolynomialField S = Gradgrad(u);
  const PolynomialField g = grad(u);
  const Point3 &x0 = p.start(), &x = p.end();
  const Eigen::Vector3d dx = detail::vec(x) - detail::vec(x0);

  RepresentationResidual r;
  const double lhs = u.c[0].eval(x) - u.c[0].eval(x0) - detail::vector_at(g, x0).dot(dx);
  r.value = std::abs(lhs - weighted_tensor_integral(S, p, x));
  r.derivative = detail::max_abs(detail::vector_at(g, x) - detail::vector_at(g, x0) - line_integral_rows(S, p));

  const double nested = detail::nested_integral(
      p, [&](const Point3& y, const Eigen::Vector3d& dl) { return Eigen::Vector3d(detail::tensor_at(S, y) * dl); },
      [](const Eigen::Vector3d& in, const Eigen::Vector3d& dl) { return in.dot(dl); }, 0.0);
  r.swap = std::abs(nested - weighted_tensor_integral(S, p, x));
  return r;
}

// v(x) - v(x0) - curl v(x0) x (x - x0)/2 = int S dl + int spn(C dl)(x - y),
// curl v(x) - curl v(x0) = 2 int C dl, with S = symGrad v, C = (Curl S)^T.
inline RepresentationResidual check_symgrad_representation(const PolynomialField& v, const PiecewisePath& p) {
  using namespace fields;
  expect(v, FieldShape::vector, "symgrad representation");
  const PolynomialField S = symGrad(v);
  const PolynomialField C = transpose(Curl(S));
  const PolynomialField cv = curl(v);
  const Point3 &x0 = p.start(), &x = p.end();
  const Eigen::Vector3d dx = detail::vec(x) - detail::vec(x0);

  RepresentationResidual r;
  const Eigen::Vector3d lhs =
      detail::vector_at(v, x) - detail::vector_at(v, x0) - 0.5 * detail::vector_at(cv, x0).cross(dx);
  const Eigen::Vector3d rhs = line_integral_rows(S, p) + spn_weighted_integral(C, p, x);
  r.value = detail::max_abs(lhs - rhs);
  r.derivative =
      detail::max_abs(detail::vector_at(cv, x) - detail::vector_at(cv, x0) - 2.0 * line_integral_rows(C, p));

  const Eigen::Vector3d nested = detail::nested_integral(
      p, [&](const Point3& y, const Eigen::Vector3d& dl) { return Eigen::Vector3d(detail::tensor_at(C, y) * dl); },
      [](const Eigen::Vector3d& in, const Eigen::Vector3d& dl) { return Eigen::Vector3d(detail::spn(in) * dl); },
      Eigen::Vector3d::Zero().eval());
  r.swap = detail::max_abs(nested - spn_weighted_integral(C, p, x));
  return r;
}

// ---------------------------------------------------------------------------
// Loop functionals

inline int functional_count(ComplexKind k) { return kind_multiplicity(k); }

// values(f, l * k + ell) = beta_{l,ell} of field f; functional index ell
// runs 0..3 (bih1, bih2; 0 is the special functional) or 0..5 (ela: 0..2
// rotations, 3..5 translations).
struct FunctionalMatrix {
  ComplexKind kind = ComplexKind::derham;
  int loops = 0;
  std::vector<Point3> anchors;  // x_{l,1}
  Eigen::MatrixXd values;

  int per_loop() const { return functional_count(kind); }
  double beta(int field, int l, int ell) const { return values(field, l * per_loop() + ell); }
};

// beta_{l, .} of one polynomial field along a closed (or open) path with anchor x1
inline std::vector<double> polynomial_functionals(const PolynomialField& f, ComplexKind kind, const PiecewisePath& p,
                                                  const Point3& x1) {
  using namespace fields;
  switch (kind) {
    case ComplexKind::derham: return {line_integral_vector(f, p)};
    case ComplexKind::bih1: {
      expect(f, FieldShape::tensor, "bih1 functionals");
      const PolynomialField q = Div(transpose(f));
      const Eigen::Vector3d b = line_integral_rows(f, p) + 0.5 * weighted_integral(q, p, x1);
      return {0.5 * line_integral_vector(q, p), b[0], b[1], b[2]};
    }
    case ComplexKind::bih2: {
      expect(f, FieldShape::tensor, "bih2 functionals");
      const Eigen::Vector3d b = line_integral_rows(f, p);
      return {weighted_tensor_integral(f, p, x1), b[0], b[1], b[2]};
    }
    case ComplexKind::ela: {
      expect(f, FieldShape::tensor, "ela functionals");
      const PolynomialField C = transpose(Curl(f));
      const Eigen::Vector3d a = line_integral_rows(C, p);
      const Eigen::Vector3d b = line_integral_rows(f, p) + spn_weighted_integral(C, p, x1);
      return {a[0], a[1], a[2], b[0], b[1], b[2]};
    }
  }
  return {};
}

inline FunctionalMatrix functional_matrix(const std::vector<PolynomialField>& fields, ComplexKind kind,
                                          const std::vector<PiecewisePath>& loops, const std::vector<Point3>& anchors) {
  if (anchors.size() != loops.size()) throw InputError("functional_matrix: one anchor per loop required");
  FunctionalMatrix m;
  m.kind = kind;
  m.loops = int(loops.size());
  m.anchors = anchors;
  const int k = m.per_loop();
  m.values.setZero(Eigen::Index(fields.size()), Eigen::Index(k) * m.loops);
  for (size_t f = 0; f < fields.size(); ++f)
    for (int l = 0; l < m.loops; ++l) {
      const auto b = polynomial_functionals(fields[f], kind, loops[size_t(l)], anchors[size_t(l)]);
      for (int e = 0; e < k; ++e) m.values(Eigen::Index(f), l * k + e) = b[size_t(e)];
    }
  return m;
}

// Closed forms of beta_{l,ell}(Theta_{j,k}); rows (j,k), columns (l,ell).
// Multiplier index k: bih1 r0 = x, r_k = e_k; bih2 p0 = 1, p_k = x_k;
// ela r_k = e_k x x (k < 3), e_{k-3} (k >= 3).
inline Eigen::MatrixXd expected_functional_matrix(ComplexKind kind, const std::vector<Point3>& anchors) {
  const int k = functional_count(kind);
  const int p = int(anchors.size());
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(p * k, p * k);
  for (int l = 0; l < p; ++l) {
    const Point3& x = anchors[size_t(l)];
    for (int kk = 0; kk < k; ++kk)
      for (int ell = 0; ell < k; ++ell) {
        double v = (kk == ell) ? 1.0 : 0.0;
        if (kind == ComplexKind::bih1 && ell != 0 && kk == 0) v += x[size_t(ell - 1)];
        if (kind == ComplexKind::bih2 && ell == 0 && kk != 0) v += x[size_t(kk - 1)];
        if (kind == ComplexKind::ela && ell >= 3 && kk < 3) {
          // <e_{ell-3} x e_kk, x>
          const Eigen::Vector3d c = Eigen::Vector3d::Unit(ell - 3).cross(Eigen::Vector3d::Unit(kk));
          v += c.dot(detail::vec(x));
        }
        e(l * k + kk, l * k + ell) = v;
      }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Lattice functionals: exact discrete analogues of the curve integrals.
// A loop is a closed walk of base points (offset 111 for derham, bih1 and
// bih2, 000 for ela) moving by +-2 e_k. The walker integrates an H2 field X
// back to the potential data it would have if X = F(g) with F the formal
// adjoint of A2 up to sign (grad, devGrad, Gradgrad, symGrad); for fields
// F(g) with single-valued g every functional vanishes exactly.

struct LatticeLoop {
  std::vector<Int3> base;  // closed: front == back

  Point3 anchor() const { return {base.front()[0] / 2.0, base.front()[1] / 2.0, base.front()[2] / 2.0}; }
};

inline Int3 base_offset(ComplexKind k) { return k == ComplexKind::ela ? Int3{0, 0, 0} : Int3{1, 1, 1}; }

namespace detail {

struct FieldReader {
  const LatticeSpace& space;
  Layout layout;
  const Vector& x;

  double comp(int c, const Int3& p) const {
    const int i = space.lookup[size_t(c)].inside(p) ? space.find(c, p) : -1;
    if (i < 0)
      throw GeometryError("loop functional reads outside the H2 support at (" + std::to_string(p[0]) + "," +
                          std::to_string(p[1]) + "," + std::to_string(p[2]) + ")");
    return x[i];
  }
  // tensor entry (i, j) at p
  double t(int i, int j, const Int3& p) const {
    if (layout == Layout::sym) return comp(layout::sym_index(i, j), p);
    double v = 0;
    for (auto [c, cf] : layout::dev_slots(i, j)) v += double(cf) * comp(c, p);
    return v;
  }
};

}  // namespace detail

inline std::vector<double> lattice_functionals(const TensorComplex& tc, const Vector& X, const LatticeLoop& loop) {
  const auto& sp = tc.lattice.space[2];
  if (X.size() != sp.size()) throw InputError("lattice_functionals: field size does not match H2");
  if (loop.base.size() < 2 || loop.base.front() != loop.base.back())
    throw InputError("lattice loop must be closed");
  const Int3 off = base_offset(tc.kind);
  for (const auto& b : loop.base)
    for (int d = 0; d < 3; ++d)
      if (((b[size_t(d)] - off[size_t(d)]) % 2 + 2) % 2 != 0) throw InputError("lattice loop off the base lattice");
  const detail::FieldReader R{sp, kind_layouts(tc.kind)[2], X};
  auto e = [](int k) { return unit(k); };

  double phi = 0, dv = 0, u = 0;
  std::array<double, 3> v{0, 0, 0}, g{0, 0, 0};
  std::array<std::array<double, 3>, 3> W{};
  for (size_t s = 0; s + 1 < loop.base.size(); ++s) {
    const Int3 d = loop.base[s + 1] - loop.base[s];
    int k = -1, sg = 0;
    for (int j = 0; j < 3; ++j)
      if (d[size_t(j)] != 0) {
        if (k >= 0 || std::abs(d[size_t(j)]) != 2) throw InputError("lattice loop step must be +-2 e_k");
        k = j;
        sg = d[size_t(j)] > 0 ? 1 : -1;
      }
    if (k < 0) throw InputError("lattice loop repeats a point");
    const Int3 B = sg > 0 ? loop.base[s] : loop.base[s + 1];
    switch (tc.kind) {
      case ComplexKind::derham: phi += sg * R.comp(k, B + e(k)); break;
      case ComplexKind::bih1: {
        // div v lives on base points; use its value at B + 2 e_k
        double q = 0;
        for (int i = 0; i < 3; ++i) q += R.t(i, k, B + e(k) + e(i)) - R.t(i, k, B + e(k) - e(i));
        const double dv_old = dv;
        dv += sg * 1.5 * q;
        const double dv_far = sg > 0 ? dv : dv_old;
        for (int i = 0; i < 3; ++i) v[size_t(i)] += sg * (R.t(i, k, B + e(i) + e(k)) + (i == k ? dv_far / 3.0 : 0.0));
        break;
      }
      case ComplexKind::bih2: {
        if (sg > 0) u += g[size_t(k)];
        for (int i = 0; i < 3; ++i) g[size_t(i)] += sg * R.t(i, k, B + e(i) + e(k));
        if (sg < 0) u -= g[size_t(k)];
        break;
      }
      case ComplexKind::ela: {
        std::array<std::array<double, 3>, 3> dW{};
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            const Int3 P = B + e(a) + e(b) + e(k);
            dW[size_t(a)][size_t(b)] = (R.t(a, k, P + e(b)) - R.t(a, k, P - e(b))) -
                                       (R.t(k, b, P + e(a)) - R.t(k, b, P - e(a)));
          }
        if (sg < 0)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) W[size_t(a)][size_t(b)] -= dW[size_t(a)][size_t(b)];
        for (int i = 0; i < 3; ++i) v[size_t(i)] += sg * (R.t(i, k, B + e(i) + e(k)) + W[size_t(i)][size_t(k)]);
        if (sg > 0)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) W[size_t(a)][size_t(b)] += dW[size_t(a)][size_t(b)];
        break;
      }
    }
  }
  switch (tc.kind) {
    case ComplexKind::derham: return {phi};
    case ComplexKind::bih1: {
      const double b0 = dv / 3.0;
      return {b0, v[0] - b0 / 2, v[1] - b0 / 2, v[2] - b0 / 2};
    }
    case ComplexKind::bih2: return {u, g[0], g[1], g[2]};
    case ComplexKind::ela: return {W[2][1], W[0][2], W[1][0], v[0], v[1], v[2]};
  }
  return {};
}

inline FunctionalMatrix lattice_functional_matrix(const TensorComplex& tc, const std::vector<Vector>& fields,
                                                  const std::vector<LatticeLoop>& loops) {
  FunctionalMatrix m;
  m.kind = tc.kind;
  m.loops = int(loops.size());
  for (const auto& l : loops) m.anchors.push_back(l.anchor());
  const int k = m.per_loop();
  m.values.setZero(Eigen::Index(fields.size()), Eigen::Index(k) * m.loops);
  for (size_t f = 0; f < fields.size(); ++f)
    for (int l = 0; l < m.loops; ++l) {
      const auto b = lattice_functionals(tc, fields[f], loops[size_t(l)]);
      for (int e = 0; e < k; ++e) m.values(Eigen::Index(f), l * k + e) = b[size_t(e)];
    }
  return m;
}

// ---------------------------------------------------------------------------
// Seeded property suite over random polynomial fields and random paths.

inline PiecewisePath random_path(std::mt19937_64& rng, int segments, bool closed = false) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Point3> v;
  for (int i = 0; i <= segments; ++i) v.push_back({U(rng), U(rng), U(rng)});
  if (closed) v.back() = v.front();
  return closed ? PiecewisePath::loop(v) : PiecewisePath::open(v);
}

struct PoincareSuiteResult {
  int trials = 0;
  double devgrad = 0, gradgrad = 0, symgrad = 0;  // worst residuals
  double closed_exact = 0;                        // worst closed-loop integral of an exact field
  double path_independence = 0;                   // worst disagreement across two paths
  double tolerance = 1e-12;

  bool passed() const { return std::max({devgrad, gradgrad, symgrad, closed_exact, path_independence}) <= tolerance; }
};

inline PoincareSuiteResult run_poincare_suite(unsigned long long seed, int trials, int degree = 3) {
  if (trials < 1) throw InputError("poincare suite: trials must be at least 1");
  std::mt19937_64 rng(seed);
  PoincareSuiteResult r;
  r.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const PolynomialField v = random_field(rng, FieldShape::vector, degree);
    const PolynomialField u = random_field(rng, FieldShape::scalar, degree);
    const PiecewisePath p = random_path(rng, 4);
    r.devgrad = std::max(r.devgrad, check_devgrad_representation(v, p).max());
    r.gradgrad = std::max(r.gradgrad, check_gradgrad_representation(u, p).max());
    r.symgrad = std::max(r.symgrad, check_symgrad_representation(v, p).max());

    const PiecewisePath loop = random_path(rng, 4, true);
    r.closed_exact = std::max(r.closed_exact, std::abs(line_integral_vector(fields::grad(u), loop)));
    r.closed_exact =
        std::max(r.closed_exact, line_integral_rows(fields::Gradgrad(u), loop).cwiseAbs().maxCoeff());

    // two paths with shared endpoints
    PiecewisePath q = random_path(rng, 3);
    q.vertices.front() = p.start();
    q.vertices.back() = p.end();
    q.validate();
    const PolynomialField T = fields::devGrad(v);
    const Eigen::Vector3d a = line_integral_rows(T, p) + 0.5 * weighted_integral(fields::Div(fields::transpose(T)), p, p.end());
    const Eigen::Vector3d b = line_integral_rows(T, q) + 0.5 * weighted_integral(fields::Div(fields::transpose(T)), q, q.end());
    r.path_independence = std::max(r.path_independence, (a - b).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace fredholm
