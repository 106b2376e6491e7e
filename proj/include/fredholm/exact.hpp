#pragma once

// Integer sparse matrices and exact rank by modular elimination.

#include <Eigen/OrderingMethods>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace fredholm {

struct IntEntry {
  int row;
  int col;
  long long value;
};

// CSR matrix over the integers.
struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> ptr{0};
  std::vector<int> idx;
  std::vector<long long> val;

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), ptr(size_t(r) + 1, 0) {}

  static IntMatrix from_entries(int r, int c, std::vector<IntEntry> e) {
    std::sort(e.begin(), e.end(), [](const IntEntry& a, const IntEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    IntMatrix m(r, c);
    size_t k = 0;
    for (int i = 0; i < r; ++i) {
      while (k < e.size() && e[k].row == i) {
        const int j = e[k].col;
        if (j < 0 || j >= c) throw InputError("IntMatrix entry out of range");
        long long s = 0;
        while (k < e.size() && e[k].row == i && e[k].col == j) s += e[k++].value;
        if (s != 0) {
          m.idx.push_back(j);
          m.val.push_back(s);
        }
      }
      m.ptr[size_t(i) + 1] = int(m.idx.size());
    }
    if (k != e.size()) throw InputError("IntMatrix entry out of range");
    return m;
  }

  static IntMatrix identity(int n) {
    std::vector<IntEntry> e;
    for (int i = 0; i < n; ++i) e.push_back({i, i, 1});
    return from_entries(n, n, std::move(e));
  }

  size_t nnz() const { return idx.size(); }
  bool is_zero() const { return idx.empty(); }

  std::vector<IntEntry> entries() const {
    std::vector<IntEntry> e;
    e.reserve(nnz());
    for (int i = 0; i < rows; ++i)
      for (int k = ptr[i]; k < ptr[i + 1]; ++k) e.push_back({i, idx[k], val[k]});
    return e;
  }

  IntMatrix transpose() const {
    auto e = entries();
    for (auto& x : e) std::swap(x.row, x.col);
    return from_entries(cols, rows, std::move(e));
  }

  IntMatrix scaled(long long s) const {
    IntMatrix m = *this;
    for (auto& v : m.val) v *= s;
    if (s == 0) m = IntMatrix(rows, cols);
    return m;
  }

  long long max_abs() const {
    long long m = 0;
    for (auto v : val) m = std::max(m, v < 0 ? -v : v);
    return m;
  }

  SparseMatrix to_real(double scale = 1.0) const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (int i = 0; i < rows; ++i)
      for (int k = ptr[i]; k < ptr[i + 1]; ++k) t.emplace_back(i, idx[k], double(val[k]) * scale);
    SparseMatrix s(rows, cols);
    s.setFromTriplets(t.begin(), t.end());
    s.makeCompressed();
    return s;
  }

  bool operator==(const IntMatrix& o) const {
    return rows == o.rows && cols == o.cols && ptr == o.ptr && idx == o.idx && val == o.val;
  }
};

// Product with an overflow check on every accumulated entry.
inline IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols != b.rows) throw InputError("IntMatrix product: inner dimension mismatch");
  IntMatrix c(a.rows, b.cols);
  std::vector<__int128> acc(size_t(b.cols), 0);
  std::vector<char> used(size_t(b.cols), 0);
  std::vector<int> touched;
  for (int i = 0; i < a.rows; ++i) {
    touched.clear();
    for (int ka = a.ptr[i]; ka < a.ptr[i + 1]; ++ka) {
      const int j = a.idx[ka];
      const __int128 av = a.val[ka];
      for (int kb = b.ptr[j]; kb < b.ptr[j + 1]; ++kb) {
        const int col = b.idx[kb];
        if (!used[col]) {
          used[col] = 1;
          touched.push_back(col);
        }
        acc[col] += av * b.val[kb];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int col : touched) {
      const __int128 v = acc[col];
      if (v > __int128(INT64_MAX) || v < __int128(INT64_MIN)) throw std::overflow_error("IntMatrix product overflow");
      if (v != 0) {
        c.idx.push_back(col);
        c.val.push_back((long long)v);
      }
      acc[col] = 0;
      used[col] = 0;
    }
    c.ptr[size_t(i) + 1] = int(c.idx.size());
  }
  return c;
}

inline IntMatrix vstack(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols != b.cols) throw InputError("vstack: column count mismatch");
  IntMatrix m = a;
  m.rows += b.rows;
  for (int i = 0; i < b.rows; ++i) {
    for (int k = b.ptr[i]; k < b.ptr[i + 1]; ++k) {
      m.idx.push_back(b.idx[k]);
      m.val.push_back(b.val[k]);
    }
    m.ptr.push_back(int(m.idx.size()));
  }
  return m;
}

namespace detail {

inline uint64_t mod_pow(uint64_t b, uint64_t e, uint64_t p) {
  uint64_t r = 1;
  b %= p;
  while (e) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

inline uint64_t to_mod(long long v, uint64_t p) {
  long long r = v % (long long)p;
  return uint64_t(r < 0 ? r + (long long)p : r);
}

// Fill-reducing column order from COLAMD on the sparsity pattern.
inline std::vector<int> colamd_order(const IntMatrix& m) {
  std::vector<int> order(size_t(m.cols));
  std::iota(order.begin(), order.end(), 0);
  if (m.rows == 0 || m.cols == 0 || m.nnz() == 0) return order;
  SparseMatrix s = m.to_real();
  Eigen::COLAMDOrdering<int> colamd;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
  colamd(s, perm);
  // perm.indices()[j] is the new position of column j
  for (int j = 0; j < m.cols; ++j) order[size_t(j)] = perm.indices()[j];
  return order;
}

}  // namespace detail

// Rank over Z/p for a prime p < 2^31. Rows are eliminated one at a time
// against the pivot rows found so far, with columns visited in COLAMD order.
inline int rank_mod_p(const IntMatrix& m, uint64_t p) {
  if (m.rows == 0 || m.cols == 0) return 0;
  const std::vector<int> pos = detail::colamd_order(m);
  const int n = m.cols;
  struct PivotRow {
    std::vector<int> cols;  // permuted positions, ascending, first is pivot (value 1)
    std::vector<uint64_t> vals;
  };
  std::vector<int> pivot_of(static_cast<size_t>(n), -1);
  std::vector<PivotRow> pivots;
  std::vector<uint64_t> acc(static_cast<size_t>(n), 0);
  std::vector<char> live(static_cast<size_t>(n), 0);
  std::priority_queue<int, std::vector<int>, std::greater<int>> heap;
  std::vector<int> outcols;
  for (int i = 0; i < m.rows; ++i) {
    for (int k = m.ptr[i]; k < m.ptr[i + 1]; ++k) {
      const int c = pos[size_t(m.idx[k])];
      acc[c] = detail::to_mod(m.val[k], p);
      if (acc[c] != 0 && !live[c]) {
        live[c] = 1;
        heap.push(c);
      }
    }
    outcols.clear();
    while (!heap.empty()) {
      const int c = heap.top();
      heap.pop();
      live[c] = 0;
      const uint64_t a = acc[c];
      if (a == 0) continue;
      const int pr = pivot_of[c];
      if (pr < 0) {
        outcols.push_back(c);
        continue;
      }
      const PivotRow& row = pivots[size_t(pr)];
      acc[c] = 0;
      const uint64_t f = p - a;
      for (size_t t = 1; t < row.cols.size(); ++t) {
        const int cc = row.cols[t];
        acc[cc] = (acc[cc] + f * row.vals[t]) % p;
        if (!live[cc]) {
          live[cc] = 1;
          heap.push(cc);
        }
      }
    }
    // outcols is ascending since every column leaves the heap in order
    PivotRow nr;
    for (int c : outcols) {
      if (acc[c] != 0) {
        nr.cols.push_back(c);
        nr.vals.push_back(acc[c]);
      }
      acc[c] = 0;
    }
    if (!nr.cols.empty()) {
      const uint64_t inv = detail::mod_pow(nr.vals[0], p - 2, p);
      for (auto& v : nr.vals) v = v * inv % p;
      pivot_of[size_t(nr.cols[0])] = int(pivots.size());
      pivots.push_back(std::move(nr));
    }
  }
  return int(pivots.size());
}

inline constexpr uint64_t kRankPrimes[2] = {2147483647ULL, 1000000007ULL};

// Modular rank never exceeds the rational rank, so the maximum over two
// primes equals it unless both primes divide every maximal nonzero minor.
inline int exact_rank(const IntMatrix& m) {
  int r = 0;
  for (uint64_t p : kRankPrimes) r = std::max(r, rank_mod_p(m, p));
  return r;
}

}  // namespace fredholm
