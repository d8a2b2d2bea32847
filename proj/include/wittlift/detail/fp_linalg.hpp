#pragma once

// Dense linear algebra and polynomial arithmetic over F_p (p < 2^20).
// Coefficients are u32; accumulation in u64 is safe for dimensions up to ~2^22.

#include "wittlift/detail/nt.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace wittlift::detail {

struct FpMat {
  int rows = 0, cols = 0;
  std::vector<u32> a;

  FpMat() = default;
  FpMat(int r, int c) : rows(r), cols(c), a((size_t)r * c, 0) {}
  u32& at(int r, int c) { return a[(size_t)r * cols + c]; }
  u32 at(int r, int c) const { return a[(size_t)r * cols + c]; }
};

inline FpMat fp_matmul(const FpMat& A, const FpMat& B, u64 p) {
  FpMat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      u64 v = A.at(i, k);
      if (!v) continue;
      const u32* brow = &B.a[(size_t)k * B.cols];
      u32* crow = &C.a[(size_t)i * C.cols];
      for (int j = 0; j < B.cols; ++j) crow[j] = (u32)((crow[j] + v * brow[j]) % p);
    }
  }
  return C;
}

inline std::vector<u32> fp_matvec(const FpMat& M, const std::vector<u32>& v, u64 p) {
  std::vector<u32> out(M.rows, 0);
  for (int i = 0; i < M.rows; ++i) {
    u64 acc = 0;
    const u32* row = &M.a[(size_t)i * M.cols];
    for (int j = 0; j < M.cols; ++j) acc += (u64)row[j] * v[j];
    out[i] = (u32)(acc % p);
  }
  return out;
}

// Row-reduced form of a square matrix with a transform T satisfying R = T*A.
// Supports consistent-system solving (free variables set to 0) and kernel bases.
struct FpSolver {
  int n = 0;
  u64 p = 0;
  FpMat R, T;
  std::vector<int> pivot_row_of_col; // -1 when the column is free
  std::vector<int> pivot_cols;

  void build(FpMat A, u64 p_) {
    n = A.rows;
    p = p_;
    T = FpMat(n, n);
    for (int i = 0; i < n; ++i) T.at(i, i) = 1;
    pivot_row_of_col.assign(n, -1);
    pivot_cols.clear();
    // entries stay below p after each pass, so a + neg*b < p + p^2 and a
    // lookup table replaces the division in the hot loop
    std::vector<u32> modtab(p * p + p);
    for (u32 v = 0; v < modtab.size(); ++v) modtab[v] = (u32)(v % p);
    int r = 0;
    for (int c = 0; c < n && r < n; ++c) {
      int pr = -1;
      for (int i = r; i < n; ++i)
        if (A.at(i, c) % p) { pr = i; break; }
      if (pr < 0) continue;
      if (pr != r) {
        for (int j = 0; j < n; ++j) {
          std::swap(A.a[(size_t)pr * n + j], A.a[(size_t)r * n + j]);
          std::swap(T.a[(size_t)pr * n + j], T.a[(size_t)r * n + j]);
        }
      }
      u64 inv = powmod(A.at(r, c), p - 2, p);
      for (int j = 0; j < n; ++j) {
        A.at(r, j) = (u32)(A.at(r, j) * inv % p);
        T.at(r, j) = (u32)(T.at(r, j) * inv % p);
      }
      const u32* arow = &A.a[(size_t)r * n];
      const u32* trow = &T.a[(size_t)r * n];
      for (int i = 0; i < n; ++i) {
        if (i == r) continue;
        u32 f = (u32)(A.at(i, c) % p);
        if (!f) continue;
        u32 neg = (u32)(p - f);
        u32* ai = &A.a[(size_t)i * n];
        u32* ti = &T.a[(size_t)i * n];
        for (int j = 0; j < n; ++j) {
          ai[j] = modtab[ai[j] + neg * arow[j]];
          ti[j] = modtab[ti[j] + neg * trow[j]];
        }
      }
      pivot_row_of_col[c] = r;
      pivot_cols.push_back(c);
      ++r;
    }
    R = std::move(A);
  }

  // Particular solution of A x = b (free variables zero), or nullopt if inconsistent.
  std::optional<std::vector<u32>> solve(const std::vector<u32>& b) const {
    std::vector<u32> y = fp_matvec(T, b, p);
    int rank = (int)pivot_cols.size();
    for (int i = rank; i < n; ++i)
      if (y[i] % p) return std::nullopt;
    std::vector<u32> x(n, 0);
    for (int k = 0; k < rank; ++k) x[pivot_cols[k]] = y[k];
    return x;
  }

  std::vector<std::vector<u32>> kernel() const {
    std::vector<std::vector<u32>> out;
    for (int c = 0; c < n; ++c) {
      if (pivot_row_of_col[c] >= 0) continue;
      std::vector<u32> v(n, 0);
      v[c] = 1;
      for (int k = 0; k < (int)pivot_cols.size(); ++k) {
        u32 coef = R.at(k, c) % p;
        if (coef) v[pivot_cols[k]] = (u32)(p - coef);
      }
      out.push_back(std::move(v));
    }
    return out;
  }
};

// --- F_p[X] helpers; polynomials are coefficient vectors, low degree first ---

inline void fp_poly_trim(std::vector<u32>& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::vector<u32> fp_poly_mulmod(const std::vector<u32>& a, const std::vector<u32>& b,
                                       const std::vector<u32>& f, u64 p) {
  // f monic of degree d; result reduced to degree < d.  Entries stay below
  // p^2 + p during the reduction sweep, handled by a lookup table.
  int d = (int)f.size() - 1;
  if (a.empty() || b.empty()) return std::vector<u32>(d, 0);
  thread_local std::vector<u32> modtab;
  thread_local u64 modtab_p = 0;
  if (modtab_p != p) {
    modtab.assign(p * p + p, 0);
    for (u32 v = 0; v < modtab.size(); ++v) modtab[v] = (u32)(v % p);
    modtab_p = p;
  }
  std::vector<u64> r(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    u64 ai = a[i];
    u64* rr = r.data() + i;
    for (size_t j = 0; j < b.size(); ++j) rr[j] += ai * b[j];
  }
  for (auto& v : r) v %= p;
  for (int k = (int)r.size() - 1; k >= d; --k) {
    u32 c = (u32)r[k];
    if (!c) continue;
    r[k] = 0;
    u32 neg = (u32)(p - c);
    u64* base = r.data() + (k - d);
    for (int t = 0; t < d; ++t) base[t] = modtab[(u32)base[t] + neg * f[t]];
  }
  std::vector<u32> out(d, 0);
  for (int t = 0; t < d && t < (int)r.size(); ++t) out[t] = (u32)r[t];
  return out;
}

inline std::vector<u32> fp_poly_powmod(std::vector<u32> a, u64 e, const std::vector<u32>& f, u64 p) {
  int d = (int)f.size() - 1;
  std::vector<u32> r(d, 0);
  r[0] = 1;
  while (e) {
    if (e & 1) r = fp_poly_mulmod(r, a, f, p);
    a = fp_poly_mulmod(a, a, f, p);
    e >>= 1;
  }
  return r;
}

inline std::vector<u32> fp_poly_mod(std::vector<u32> a, const std::vector<u32>& b, u64 p) {
  fp_poly_trim(a);
  std::vector<u32> bb = b;
  fp_poly_trim(bb);
  u64 inv = powmod(bb.back(), p - 2, p);
  while (a.size() >= bb.size()) {
    u64 c = (u64)a.back() * inv % p;
    size_t off = a.size() - bb.size();
    u64 neg = p - c;
    for (size_t k = 0; k + 1 < bb.size(); ++k) a[off + k] = (u32)((a[off + k] + neg * bb[k]) % p);
    a.pop_back();
    fp_poly_trim(a);
  }
  return a;
}

// inverse of a modulo monic irreducible f, via extended Euclid
inline std::vector<u32> fp_poly_invmod(const std::vector<u32>& a_in, const std::vector<u32>& f,
                                       u64 p) {
  int d = (int)f.size() - 1;
  std::vector<u32> r0 = f, r1 = a_in;
  fp_poly_trim(r1);
  if (r1.empty()) throw std::runtime_error("fp_poly_invmod: zero");
  std::vector<u32> t0, t1 = {1};
  while (!r1.empty() && r1.size() > 1) {
    // quotient of r0 by r1
    std::vector<u32> q;
    std::vector<u32> rem = r0;
    fp_poly_trim(rem);
    u64 inv_lead = powmod(r1.back(), p - 2, p);
    q.assign(rem.size() >= r1.size() ? rem.size() - r1.size() + 1 : 1, 0);
    while (rem.size() >= r1.size()) {
      u64 c = (u64)rem.back() * inv_lead % p;
      size_t off = rem.size() - r1.size();
      q[off] = (u32)c;
      u64 neg = p - c;
      for (size_t k = 0; k + 1 < r1.size(); ++k)
        rem[off + k] = (u32)((rem[off + k] + neg * r1[k]) % p);
      rem.pop_back();
      fp_poly_trim(rem);
    }
    // (r0, r1) <- (r1, rem); (t0, t1) <- (t1, t0 - q*t1)
    std::vector<u32> qt1;
    if (!t1.empty()) {
      qt1.assign(q.size() + t1.size() - 1, 0);
      for (size_t i = 0; i < q.size(); ++i) {
        if (!q[i]) continue;
        for (size_t j = 0; j < t1.size(); ++j)
          qt1[i + j] = (u32)((qt1[i + j] + (u64)q[i] * t1[j]) % p);
      }
    }
    std::vector<u32> nt(std::max(t0.size(), qt1.size()), 0);
    for (size_t i = 0; i < nt.size(); ++i) {
      u64 v = (i < t0.size() ? t0[i] : 0) + p - (i < qt1.size() ? qt1[i] % p : 0);
      nt[i] = (u32)(v % p);
    }
    fp_poly_trim(nt);
    r0 = std::move(r1);
    r1 = std::move(rem);
    t0 = std::move(t1);
    t1 = std::move(nt);
  }
  if (r1.empty()) throw std::runtime_error("fp_poly_invmod: not coprime");
  // r1 is a nonzero constant; scale
  u64 s = powmod(r1[0], p - 2, p);
  std::vector<u32> out(d, 0);
  for (size_t i = 0; i < t1.size() && i < (size_t)d; ++i) out[i] = (u32)((u64)t1[i] * s % p);
  return out;
}

inline std::vector<u32> fp_poly_gcd(std::vector<u32> a, std::vector<u32> b, u64 p) {
  fp_poly_trim(a);
  fp_poly_trim(b);
  while (!b.empty()) {
    auto r = fp_poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// Irreducibility of monic f of degree n over F_p:
// X^{p^n} == X mod f and gcd(X^{p^{n/l}} - X, f) = 1 for primes l | n.
inline bool fp_poly_irreducible(const std::vector<u32>& f, u64 p) {
  int n = (int)f.size() - 1;
  if (n < 1) return false;
  if (n == 1) return true;
  std::vector<u32> x(n, 0);
  x[1] = 1;
  // X^{p^n} via n successive p-th powers
  std::vector<u32> t = x;
  for (int i = 0; i < n; ++i) t = fp_poly_powmod(t, p, f, p);
  if (t != x) return false;
  std::vector<int> pr;
  int m = n;
  for (int d = 2; d * d <= m; ++d)
    if (m % d == 0) {
      pr.push_back(d);
      while (m % d == 0) m /= d;
    }
  if (m > 1) pr.push_back(m);
  for (int l : pr) {
    std::vector<u32> s = x;
    for (int i = 0; i < n / l; ++i) s = fp_poly_powmod(s, p, f, p);
    std::vector<u32> diff(n, 0);
    for (int k = 0; k < n; ++k) diff[k] = (u32)((s[k] + p - x[k]) % p);
    auto g = fp_poly_gcd(f, diff, p);
    if (g.size() > 1) return false;
  }
  return true;
}

// Order of X in F_p[X]/(f) equals p^n - 1 (f assumed irreducible of degree n).
inline bool fp_poly_primitive(const std::vector<u32>& f, u64 p, const std::vector<u64>& qfactors) {
  int n = (int)f.size() - 1;
  u64 qm1 = pow_u64(p, n) - 1;
  std::vector<u32> x(n, 0);
  if (n == 1) {
    // root is -f[0]; check multiplicative order in F_p
    u64 r = (p - f[0] % p) % p;
    if (r == 0) return false;
    for (u64 l : qfactors)
      if (powmod(r, qm1 / l, p) == 1) return false;
    return true;
  }
  x[1] = 1;
  std::vector<u32> one(n, 0);
  one[0] = 1;
  for (u64 l : qfactors) {
    if (fp_poly_powmod(x, qm1 / l, f, p) == one) return false;
  }
  return true;
}

} // namespace wittlift::detail
