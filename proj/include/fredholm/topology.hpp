#pragma once

// Voxel domains, their closed cubical complexes, Betti numbers, the
// invariants (n, m, p) and integer generator loops / cut cocycles.

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "exact.hpp"

namespace fredholm {

using Int3 = std::array<int, 3>;

inline Int3 operator+(Int3 a, Int3 b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Int3 operator-(Int3 a, Int3 b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Int3 unit(int d, int s = 1) {
  Int3 e{0, 0, 0};
  e[size_t(d)] = s;
  return e;
}

class VoxelDomain {
 public:
  VoxelDomain() = default;
  VoxelDomain(Int3 box, std::string label = {}) : box_(box), label_(std::move(label)) {
    for (int d : box)
      if (d <= 0) throw InputError("voxel box dimensions must be positive");
    occ_.assign(size_t(box[0]) * box[1] * box[2], 0);
  }

  static VoxelDomain from_voxels(Int3 box, const std::vector<Int3>& v, std::string label = {}) {
    VoxelDomain d(box, std::move(label));
    for (const auto& x : v) {
      if (!d.in_box(x)) throw InputError("voxel outside the bounding box");
      if (d.has(x)) throw InputError("duplicate voxel");
      d.set(x, true);
    }
    return d;
  }

  const Int3& box() const { return box_; }
  const std::string& label() const { return label_; }
  void set_label(std::string s) { label_ = std::move(s); }

  bool in_box(const Int3& v) const {
    return v[0] >= 0 && v[1] >= 0 && v[2] >= 0 && v[0] < box_[0] && v[1] < box_[1] && v[2] < box_[2];
  }
  bool has(const Int3& v) const { return in_box(v) && occ_[flat(v)]; }
  void set(const Int3& v, bool on) {
    if (!in_box(v)) throw InputError("voxel outside the bounding box");
    occ_[flat(v)] = on ? 1 : 0;
  }

  std::vector<Int3> voxels() const {
    std::vector<Int3> out;
    for (int x = 0; x < box_[0]; ++x)
      for (int y = 0; y < box_[1]; ++y)
        for (int z = 0; z < box_[2]; ++z)
          if (occ_[flat({x, y, z})]) out.push_back({x, y, z});
    return out;
  }
  size_t count() const { return size_t(std::count(occ_.begin(), occ_.end(), 1)); }

  // nonempty and the outermost layer of the box is empty
  void validate() const {
    if (count() == 0) throw InputError("domain has no voxels");
    for (const auto& v : voxels())
      for (int d = 0; d < 3; ++d)
        if (v[size_t(d)] == 0 || v[size_t(d)] == box_[size_t(d)] - 1)
          throw InputError("domain touches the bounding box; a one-voxel empty margin is required");
  }

  size_t flat(const Int3& v) const { return (size_t(v[0]) * box_[1] + v[1]) * box_[2] + v[2]; }

  bool operator==(const VoxelDomain& o) const { return box_ == o.box_ && occ_ == o.occ_; }

 private:
  Int3 box_{0, 0, 0};
  std::string label_;
  std::vector<char> occ_;
};

// Each voxel becomes r^3 voxels; the result is cropped to a one-voxel margin.
inline VoxelDomain refine(const VoxelDomain& d, int r) {
  if (r < 1) throw InputError("refinement factor must be at least 1");
  auto vs = d.voxels();
  if (vs.empty()) throw InputError("domain has no voxels");
  Int3 lo = vs[0], hi = vs[0];
  for (const auto& v : vs)
    for (size_t k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  Int3 box;
  for (size_t k = 0; k < 3; ++k) box[k] = (hi[k] - lo[k] + 1) * r + 2;
  VoxelDomain out(box, d.label());
  for (const auto& v : vs)
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c)
          out.set({(v[0] - lo[0]) * r + a + 1, (v[1] - lo[1]) * r + b + 1, (v[2] - lo[2]) * r + c + 1}, true);
  return out;
}

// Voxels whose 26 neighbours all belong to the domain.
inline VoxelDomain erode(const VoxelDomain& d) {
  VoxelDomain out(d.box(), d.label() + "-eroded");
  for (const auto& v : d.voxels()) {
    bool inner = true;
    for (int a = -1; a <= 1 && inner; ++a)
      for (int b = -1; b <= 1 && inner; ++b)
        for (int c = -1; c <= 1 && inner; ++c)
          if (!d.has({v[0] + a, v[1] + b, v[2] + c})) inner = false;
    if (inner) out.set(v, true);
  }
  return out;
}

// Dense lookup over doubled coordinates 0..2N in each direction.
class DoubledGrid {
 public:
  DoubledGrid() = default;
  explicit DoubledGrid(Int3 box) : ext_{2 * box[0] + 1, 2 * box[1] + 1, 2 * box[2] + 1} {
    data_.assign(size_t(ext_[0]) * ext_[1] * ext_[2], -1);
  }
  bool inside(const Int3& p) const {
    return p[0] >= 0 && p[1] >= 0 && p[2] >= 0 && p[0] < ext_[0] && p[1] < ext_[1] && p[2] < ext_[2];
  }
  int get(const Int3& p) const { return inside(p) ? data_[flat(p)] : -1; }
  void put(const Int3& p, int v) { data_[flat(p)] = v; }
  const Int3& extent() const { return ext_; }

 private:
  size_t flat(const Int3& p) const { return (size_t(p[0]) * ext_[1] + p[1]) * ext_[2] + p[2]; }
  Int3 ext_{0, 0, 0};
  std::vector<int> data_;
};

inline int cell_dim(const Int3& p) { return (p[0] & 1) + (p[1] & 1) + (p[2] & 1); }

// Voxels incident to the cell at doubled coordinate p.
inline std::vector<Int3> adjacent_voxels(const Int3& p) {
  std::vector<Int3> out;
  std::array<std::vector<int>, 3> opt;
  for (size_t d = 0; d < 3; ++d) {
    if (p[d] & 1) opt[d] = {(p[d] - 1) / 2};
    else opt[d] = {p[d] / 2 - 1, p[d] / 2};
  }
  for (int a : opt[0])
    for (int b : opt[1])
      for (int c : opt[2]) out.push_back({a, b, c});
  return out;
}

inline bool touches_domain(const VoxelDomain& d, const Int3& p) {
  for (const auto& v : adjacent_voxels(p))
    if (d.has(v)) return true;
  return false;
}

inline bool inside_domain(const VoxelDomain& d, const Int3& p) {
  for (const auto& v : adjacent_voxels(p))
    if (!d.has(v)) return false;
  return true;
}

struct CubicalComplex {
  Int3 box{0, 0, 0};
  std::array<std::vector<Int3>, 4> cells;  // doubled coordinates, lexicographic
  DoubledGrid lookup;                     // cell id within its dimension
  std::array<IntMatrix, 3> boundary;       // boundary[k-1] = d_k : C_k -> C_{k-1}

  int id(const Int3& p) const { return lookup.get(p); }
  std::array<int, 4> counts() const {
    return {int(cells[0].size()), int(cells[1].size()), int(cells[2].size()), int(cells[3].size())};
  }
  long long euler() const {
    auto c = counts();
    return (long long)c[0] - c[1] + c[2] - c[3];
  }
};

// Signed cubical boundary of the k-cell at p: upper face minus lower face
// along the i-th odd direction, with sign (-1)^i.
inline std::vector<std::pair<Int3, int>> cell_boundary(const Int3& p) {
  std::vector<std::pair<Int3, int>> out;
  int i = 0;
  for (int d = 0; d < 3; ++d) {
    if (!(p[size_t(d)] & 1)) continue;
    const int s = (i % 2 == 0) ? 1 : -1;
    out.push_back({p + unit(d), s});
    out.push_back({p - unit(d), -s});
    ++i;
  }
  return out;
}

// Closed complex: every cell incident to at least one voxel.
inline CubicalComplex build_complex(const VoxelDomain& dom) {
  if (dom.count() == 0) throw InputError("domain has no voxels");
  CubicalComplex cx;
  cx.box = dom.box();
  cx.lookup = DoubledGrid(dom.box());
  const Int3 ext = cx.lookup.extent();
  for (int x = 0; x < ext[0]; ++x)
    for (int y = 0; y < ext[1]; ++y)
      for (int z = 0; z < ext[2]; ++z) {
        Int3 p{x, y, z};
        if (!touches_domain(dom, p)) continue;
        auto& list = cx.cells[size_t(cell_dim(p))];
        cx.lookup.put(p, int(list.size()));
        list.push_back(p);
      }
  for (int k = 1; k <= 3; ++k) {
    std::vector<IntEntry> e;
    const auto& ck = cx.cells[size_t(k)];
    for (int j = 0; j < int(ck.size()); ++j)
      for (const auto& [q, s] : cell_boundary(ck[size_t(j)])) {
        const int i = cx.id(q);
        if (i < 0) throw InvariantViolation("closed complex is missing a face");
        e.push_back({i, j, s});
      }
    cx.boundary[size_t(k - 1)] = IntMatrix::from_entries(int(cx.cells[size_t(k - 1)].size()), int(ck.size()), e);
  }
  return cx;
}

// b_k = dim C_k - rank d_k - rank d_{k+1}, ranks exact over Q.
inline std::array<int, 4> betti_numbers(const CubicalComplex& cx) {
  std::array<int, 5> rk{0, 0, 0, 0, 0};
  for (int k = 1; k <= 3; ++k) rk[size_t(k)] = exact_rank(cx.boundary[size_t(k - 1)]);
  auto c = cx.counts();
  std::array<int, 4> b{};
  for (int k = 0; k < 4; ++k) b[size_t(k)] = c[size_t(k)] - rk[size_t(k)] - rk[size_t(k + 1)];
  return b;
}

// Labels of the 6-connected components of the empty voxels; component 0
// contains the box corner, cavities follow in order of their first voxel.
struct ComplementComponents {
  std::vector<int> label;  // per voxel (flat index); -1 on filled voxels
  int count = 0;
};

inline ComplementComponents complement_components(const VoxelDomain& d) {
  const Int3 b = d.box();
  ComplementComponents cc;
  cc.label.assign(size_t(b[0]) * b[1] * b[2], -1);
  auto flood = [&](Int3 s, int lab) {
    std::deque<Int3> q{s};
    cc.label[d.flat(s)] = lab;
    while (!q.empty()) {
      Int3 v = q.front();
      q.pop_front();
      for (int dir = 0; dir < 3; ++dir)
        for (int sg : {-1, 1}) {
          Int3 w = v + unit(dir, sg);
          if (!d.in_box(w) || d.has(w) || cc.label[d.flat(w)] >= 0) continue;
          cc.label[d.flat(w)] = lab;
          q.push_back(w);
        }
    }
  };
  if (d.has({0, 0, 0})) throw InputError("box corner must be empty");
  flood({0, 0, 0}, cc.count++);
  for (int x = 0; x < b[0]; ++x)
    for (int y = 0; y < b[1]; ++y)
      for (int z = 0; z < b[2]; ++z) {
        Int3 v{x, y, z};
        if (!d.has(v) && cc.label[d.flat(v)] < 0) flood(v, cc.count++);
      }
  return cc;
}

// Components of the closure (voxels sharing any cell).
inline int closure_components(const VoxelDomain& d) {
  std::vector<int> seen(size_t(d.box()[0]) * d.box()[1] * d.box()[2], 0);
  int n = 0;
  for (const auto& s : d.voxels()) {
    if (seen[d.flat(s)]) continue;
    ++n;
    std::deque<Int3> q{s};
    seen[d.flat(s)] = 1;
    while (!q.empty()) {
      Int3 v = q.front();
      q.pop_front();
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          for (int c = -1; c <= 1; ++c) {
            Int3 w{v[0] + a, v[1] + b, v[2] + c};
            if (d.has(w) && !seen[d.flat(w)]) {
              seen[d.flat(w)] = 1;
              q.push_back(w);
            }
          }
    }
  }
  return n;
}

struct TopologyInvariants {
  int n = 0, m = 0, p = 0;
  std::array<int, 4> betti{};
};

inline TopologyInvariants invariants(const VoxelDomain& d, const CubicalComplex& cx) {
  TopologyInvariants t;
  t.betti = betti_numbers(cx);
  t.n = t.betti[0];
  t.p = t.betti[1];
  t.m = complement_components(d).count;
  if (t.m != t.betti[2] + 1)
    throw InvariantViolation("complement components " + std::to_string(t.m) + " but b2 + 1 = " +
                             std::to_string(t.betti[2] + 1));
  if (t.betti[3] != 0) throw InvariantViolation("b3 of a voxel domain must vanish");
  if (t.n != closure_components(d)) throw InvariantViolation("b0 disagrees with the voxel flood fill");
  if (cx.euler() != (long long)t.betti[0] - t.betti[1] + t.betti[2] - t.betti[3])
    throw InvariantViolation("Euler characteristic mismatch");
  return t;
}

inline TopologyInvariants invariants(const VoxelDomain& d) { return invariants(d, build_complex(d)); }

struct EdgeStep {
  int edge;  // edge id
  int sign;  // +1 when traversed along its orientation
};

struct HandleSystem {
  std::vector<std::vector<Int3>> loops;        // closed vertex sequences (first == last)
  std::vector<std::vector<EdgeStep>> loop_edges;
  std::vector<std::vector<long long>> cocycles; // edge-indexed
  std::vector<std::vector<long long>> pairing;  // pairing[l][j] = <cocycle l, loop j>
};

inline long long pair_cochain(const std::vector<long long>& c, const std::vector<EdgeStep>& loop) {
  long long s = 0;
  for (const auto& st : loop) s += st.sign * c[size_t(st.edge)];
  return s;
}

inline long long integer_determinant(std::vector<std::vector<long long>> a) {
  // Bareiss fraction-free elimination
  const int n = int(a.size());
  if (n == 0) return 1;
  long long sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[size_t(k)][size_t(k)] == 0) {
      int r = k + 1;
      while (r < n && a[size_t(r)][size_t(k)] == 0) ++r;
      if (r == n) return 0;
      std::swap(a[size_t(k)], a[size_t(r)]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        a[size_t(i)][size_t(j)] =
            (a[size_t(i)][size_t(j)] * a[size_t(k)][size_t(k)] - a[size_t(i)][size_t(k)] * a[size_t(k)][size_t(j)]) /
            prev;
    prev = a[size_t(k)][size_t(k)];
  }
  return sign * a[size_t(n - 1)][size_t(n - 1)];
}

// Spanning forest of the 1-skeleton; fundamental cycles of the non-tree
// edges modulo face boundaries are reduced with unit pivots. The surviving
// free edges give the loops, back-substitution gives the dual cocycles.
inline HandleSystem handle_system(const CubicalComplex& cx, int p) {
  const int nv = int(cx.cells[0].size()), ne = int(cx.cells[1].size()), nf = int(cx.cells[2].size());
  // vertex adjacency via d1 columns
  const IntMatrix d1t = cx.boundary[0].transpose();  // edges x vertices
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(nv));  // (neighbour, edge)
  std::vector<std::array<int, 2>> ends(static_cast<size_t>(ne));  // tail (-1 entry), head (+1 entry)
  for (int e = 0; e < ne; ++e) {
    for (int k = d1t.ptr[e]; k < d1t.ptr[e + 1]; ++k) ends[size_t(e)][d1t.val[k] > 0 ? 1 : 0] = d1t.idx[k];
    adj[size_t(ends[size_t(e)][0])].push_back({ends[size_t(e)][1], e});
    adj[size_t(ends[size_t(e)][1])].push_back({ends[size_t(e)][0], e});
  }
  std::vector<int> parent_edge(static_cast<size_t>(nv), -2), parent(static_cast<size_t>(nv), -1), depth(static_cast<size_t>(nv), 0);
  std::vector<char> tree(static_cast<size_t>(ne), 0);
  for (int s = 0; s < nv; ++s) {
    if (parent_edge[size_t(s)] != -2) continue;
    parent_edge[size_t(s)] = -1;
    std::deque<int> q{s};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (auto [w, e] : adj[size_t(v)]) {
        if (parent_edge[size_t(w)] != -2) continue;
        parent_edge[size_t(w)] = e;
        parent[size_t(w)] = v;
        depth[size_t(w)] = depth[size_t(v)] + 1;
        tree[size_t(e)] = 1;
        q.push_back(w);
      }
    }
  }
  // relation columns: d2 restricted to non-tree edges
  std::vector<std::map<int, long long>> col(static_cast<size_t>(nf));
  std::vector<std::set<int>> row_cols(static_cast<size_t>(ne));
  const IntMatrix d2t = cx.boundary[1].transpose();  // faces x edges
  for (int f = 0; f < nf; ++f)
    for (int k = d2t.ptr[f]; k < d2t.ptr[f + 1]; ++k) {
      const int e = d2t.idx[k];
      if (tree[size_t(e)]) continue;
      col[size_t(f)][e] = d2t.val[k];
      row_cols[size_t(e)].insert(f);
    }
  std::vector<int> pivot_col_of_row(static_cast<size_t>(ne), -1);
  std::vector<std::pair<int, int>> pivots;  // (row, col)
  for (int f = 0; f < nf; ++f) {
    if (col[size_t(f)].empty()) continue;
    int prow = -1;
    for (auto [e, v] : col[size_t(f)])
      if ((v == 1 || v == -1) && pivot_col_of_row[size_t(e)] < 0) {
        prow = e;
        break;
      }
    if (prow < 0) throw GeometryError("homology reduction needs a non-unit pivot");
    const long long pv = col[size_t(f)][prow];
    pivot_col_of_row[size_t(prow)] = f;
    pivots.push_back({prow, f});
    std::vector<int> others(row_cols[size_t(prow)].begin(), row_cols[size_t(prow)].end());
    for (int g : others) {
      if (g == f) continue;
      const long long factor = col[size_t(g)][prow] * pv;  // pv = +-1
      for (auto [e, v] : col[size_t(f)]) {
        long long& t = col[size_t(g)][e];
        t -= factor * v;
        if (t == 0) {
          col[size_t(g)].erase(e);
          row_cols[size_t(e)].erase(g);
        } else {
          row_cols[size_t(e)].insert(g);
        }
      }
    }
  }
  std::vector<int> free_edges;
  for (int e = 0; e < ne; ++e)
    if (!tree[size_t(e)] && pivot_col_of_row[size_t(e)] < 0) free_edges.push_back(e);
  if (int(free_edges.size()) != p)
    throw InvariantViolation("handle extraction found " + std::to_string(free_edges.size()) + " loops, expected " +
                             std::to_string(p));
  HandleSystem hs;
  std::vector<int> free_pos(static_cast<size_t>(ne), -1);
  for (size_t l = 0; l < free_edges.size(); ++l) free_pos[size_t(free_edges[l])] = int(l);
  // loops: free edge tail -> head, then back along the tree to the tail
  for (int e : free_edges) {
    const int t = ends[size_t(e)][0], h = ends[size_t(e)][1];
    std::vector<int> path_h{h}, path_t{t};
    while (depth[size_t(path_h.back())] > depth[size_t(path_t.back())]) path_h.push_back(parent[size_t(path_h.back())]);
    while (depth[size_t(path_t.back())] > depth[size_t(path_h.back())]) path_t.push_back(parent[size_t(path_t.back())]);
    while (path_h.back() != path_t.back()) {
      path_h.push_back(parent[size_t(path_h.back())]);
      path_t.push_back(parent[size_t(path_t.back())]);
    }
    // t -> h along e, h up to the common ancestor, then down to t
    std::vector<int> verts{t};
    verts.insert(verts.end(), path_h.begin(), path_h.end());
    for (size_t i = path_t.size() - 1; i-- > 0;) verts.push_back(path_t[i]);
    // dedupe consecutive repeats
    std::vector<int> vv;
    for (int v : verts)
      if (vv.empty() || vv.back() != v) vv.push_back(v);
    if (vv.back() != vv.front()) vv.push_back(vv.front());
    std::vector<Int3> pts;
    std::vector<EdgeStep> steps;
    for (size_t i = 0; i + 1 < vv.size(); ++i) {
      const int u = vv[i], w = vv[i + 1];
      int edge = -1;
      for (auto [nb, ee] : adj[size_t(u)])
        if (nb == w && (ee == e || tree[size_t(ee)])) {
          edge = ee;
          if (ee == e) break;
        }
      if (edge < 0) throw InvariantViolation("loop assembly lost an edge");
      steps.push_back({edge, ends[size_t(edge)][0] == u ? 1 : -1});
      pts.push_back(cx.cells[0][size_t(u)]);
    }
    pts.push_back(cx.cells[0][size_t(vv.back())]);
    hs.loops.push_back(pts);
    hs.loop_edges.push_back(steps);
  }
  for (size_t l = 0; l < free_edges.size(); ++l) {
    std::vector<long long> th(static_cast<size_t>(ne), 0);
    th[size_t(free_edges[l])] = 1;
    for (auto [r, c] : pivots) {
      long long s = 0;
      auto it = col[size_t(c)].find(free_edges[l]);
      if (it != col[size_t(c)].end()) s = it->second;
      th[size_t(r)] = -col[size_t(c)][r] * s;
    }
    hs.cocycles.push_back(th);
  }
  hs.pairing.assign(static_cast<size_t>(p), std::vector<long long>(size_t(p), 0));
  for (int l = 0; l < p; ++l)
    for (int j = 0; j < p; ++j) hs.pairing[size_t(l)][size_t(j)] = pair_cochain(hs.cocycles[size_t(l)], hs.loop_edges[size_t(j)]);
  return hs;
}

// Closedness of an edge cochain: its coboundary on every face vanishes.
inline bool is_cocycle(const CubicalComplex& cx, const std::vector<long long>& c) {
  const IntMatrix& d2 = cx.boundary[1];  // edges x faces
  std::vector<long long> cob(cx.cells[2].size(), 0);
  for (int e = 0; e < d2.rows; ++e)
    for (int k = d2.ptr[e]; k < d2.ptr[e + 1]; ++k) cob[size_t(d2.idx[k])] += d2.val[k] * c[size_t(e)];
  for (auto v : cob)
    if (v != 0) return false;
  return true;
}

}  // namespace fredholm
