#pragma once

// Exact arithmetic in truncated unramified Witt rings W(F_{p^n})/p^N.
//
// A context realizes W(F_{p^n})/p^N as (Z/p^N)[X]/(gpoly).  For contexts made
// by WittContext::make, gpoly is the Hensel lift of a deterministically chosen
// primitive polynomial to the unique monic factor of X^{p^n-1}-1, so the class
// zeta of X is a Teichmueller element and sigma(zeta) = zeta^p holds exactly.
// Tower contexts produced by extended() (residue degree multiplied by p) carry
// an arbitrary monic lift instead; their Frobenius is the unique automorphism
// lifting x -> x^p, computed by Hensel root-finding.
//
// Every element carries an absolute precision guarantee `prec`: the element is
// known modulo p^prec.  Arithmetic propagates guarantees (multiplication by p
// raises them, divide_exact lowers them) and comparisons are made at the
// minimum guarantee of their operands.

#include "wittlift/detail/fp_linalg.hpp"
#include "wittlift/detail/nt.hpp"
#include "wittlift/errors.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace wittlift {

using detail::u32;
using detail::u64;
using detail::u128;

class WittContext;
using Ctx = std::shared_ptr<const WittContext>;

struct WittElem;
struct ResidueElem;

class WittContext : public std::enable_shared_from_this<WittContext> {
public:
  u64 p = 0;
  int deg = 0; // residue-field degree over F_p
  int N = 0;   // elements live in Z/p^N coefficients
  u64 q = 0;   // p^N
  std::vector<u64> gpoly;      // monic, deg+1 coefficients, low first
  bool teich_basis = false;    // zeta Teichmueller (make-contexts only)
  Ctx parent;                  // tower parent, or null
  std::vector<u64> parent_image; // rep of parent zeta in this ring (towers only)

  static Ctx make(u64 p, int n, int N);

  // Same ring at a different coefficient precision (deterministic lift/reduction).
  Ctx at_precision(int N2) const;

  // The cached residue-degree-times-p tower extension of this context.
  Ctx extended() const;

  // Reconstructs a ring from serialized data; gpoly mod p must be irreducible.
  static Ctx from_gpoly(u64 p, int N, const std::vector<u64>& gpoly);

  // --- raw coefficient-vector ring operations (internal plumbing) ---
  std::vector<u64> raw_mul(const std::vector<u64>& a, const std::vector<u64>& b) const;
  std::vector<u64> raw_apply(const std::vector<u64>& mat, const std::vector<u64>& v) const;
  std::vector<u64> raw_pow(std::vector<u64> a, u64 e) const;
  std::vector<u64> raw_eval_scalar_poly(const std::vector<u64>& coeffs,
                                        const std::vector<u64>& x) const;
  int raw_val(const std::vector<u64>& c) const; // min p-valuation, N if zero
  std::vector<u64> raw_inv_unit(const std::vector<u64>& a) const;
  std::vector<u64> hensel_root_of_gpoly(const std::vector<u64>& g,
                                        const std::vector<u32>& seed) const;

  const std::vector<u64>& sigma_matrix() const { return sig_; }
  const std::vector<u64>& sigma_inv_matrix() const { return siginv_; }
  const std::vector<u32>& residue_gpoly() const { return gp0_; }
  int fold_interval() const { return fold_every_; }

  // Row reduction of (Frob^k - 1) on the residue field, cached per k.
  const detail::FpSolver& asw_solver(int k) const;
  // Row reduction of Frob (used for residue Frobenius preimages).
  const detail::FpSolver& frob_solver() const;
  const detail::FpMat& frob_matrix() const { return frob0_; }

  WittElem zeta() const;
  WittElem zero() const;
  WittElem one() const;
  WittElem from_int(detail::i64 v) const;

  std::string describe() const;

private:
  std::vector<u64> xpow_;       // X^{deg+i} mod gpoly, i < deg-1, row-major
  std::vector<u64> sig_;        // deg x deg, sigma(v) = sig * v (row-major)
  std::vector<u64> siginv_;
  std::vector<u32> gp0_;        // gpoly mod p
  std::vector<u32> xpow0_;      // residue reduction table
  detail::FpMat frob0_;         // residue Frobenius matrix
  int fold_every_ = 1 << 30;    // accumulator fold interval for raw_mul

  mutable std::mutex mu_;
  mutable std::map<int, detail::FpSolver> asw_cache_;
  mutable std::optional<detail::FpSolver> frob_lu_;
  mutable Ctx child_;
  mutable std::map<int, Ctx> prec_siblings_;

public:
  mutable std::mutex embed_mu_;
  mutable std::map<const WittContext*, std::vector<u64>> embed_cache_;
  // powers of the generator image, column j = image^j, for fast re-embedding
  mutable std::map<const WittContext*, std::vector<u64>> embed_matrix_cache_;

private:
  WittContext() = default;
  void init_tables();
  void build_sigma_from_root(const std::vector<u64>& s, const std::vector<u64>& sinv);
  friend Ctx build_base_context(u64 p, int n, int N);
  friend Ctx build_tower_context(const Ctx& par);
  friend Ctx build_from_gpoly(u64 p, int N, const std::vector<u64>& g, const Ctx& par,
                              const std::vector<u64>& parent_image);
};

// An element of F_{p^n}, in the same polynomial basis as its context.
struct ResidueElem {
  Ctx ctx;
  std::vector<u32> c;

  ResidueElem() = default;
  ResidueElem(Ctx cx, std::vector<u32> cc) : ctx(std::move(cx)), c(std::move(cc)) {}

  static ResidueElem zero(const Ctx& cx) { return ResidueElem(cx, std::vector<u32>(cx->deg, 0)); }
  static ResidueElem one(const Ctx& cx) {
    std::vector<u32> v(cx->deg, 0);
    v[0] = 1;
    return ResidueElem(cx, std::move(v));
  }

  bool is_zero() const {
    for (u32 v : c)
      if (v % ctx->p) return false;
    return true;
  }
  bool operator==(const ResidueElem& o) const {
    if (ctx.get() != o.ctx.get()) return false;
    for (int i = 0; i < ctx->deg; ++i)
      if ((c[i] % ctx->p + ctx->p - o.c[i] % ctx->p) % ctx->p != 0) return false;
    return true;
  }
  ResidueElem operator+(const ResidueElem& o) const {
    check(o);
    std::vector<u32> v(c.size());
    for (size_t i = 0; i < c.size(); ++i) v[i] = (u32)((c[i] + o.c[i]) % ctx->p);
    return ResidueElem(ctx, std::move(v));
  }
  ResidueElem operator-(const ResidueElem& o) const {
    check(o);
    std::vector<u32> v(c.size());
    for (size_t i = 0; i < c.size(); ++i) v[i] = (u32)((c[i] + ctx->p - o.c[i] % ctx->p) % ctx->p);
    return ResidueElem(ctx, std::move(v));
  }
  ResidueElem operator*(const ResidueElem& o) const {
    check(o);
    return ResidueElem(ctx, detail::fp_poly_mulmod(c, o.c, ctx->residue_gpoly(), ctx->p));
  }
  ResidueElem pow(u64 e) const {
    return ResidueElem(ctx, detail::fp_poly_powmod(c, e, ctx->residue_gpoly(), ctx->p));
  }
  ResidueElem frobenius(int k = 1) const {
    int r = ((k % ctx->deg) + ctx->deg) % ctx->deg;
    ResidueElem out = *this;
    for (int i = 0; i < r; ++i) out = out.pow(ctx->p);
    return out;
  }
  ResidueElem inv() const {
    if (is_zero()) throw solver_error("NonUnit", "residue inverse of zero");
    return ResidueElem(ctx, detail::fp_poly_invmod(c, ctx->residue_gpoly(), ctx->p));
  }

private:
  void check(const ResidueElem& o) const {
    if (ctx.get() != o.ctx.get())
      throw usage_error("IncompatibleContexts", "residue elements from different contexts");
  }
};

struct WittElem {
  Ctx ctx;
  std::vector<u64> c; // coefficients mod p^N in the zeta-power basis
  int prec = 0;       // known modulo p^prec

  WittElem() = default;
  WittElem(Ctx cx, std::vector<u64> cc, int pr)
      : ctx(std::move(cx)), c(std::move(cc)), prec(pr) {}

  static WittElem zero(const Ctx& cx) { return WittElem(cx, std::vector<u64>(cx->deg, 0), cx->N); }
  static WittElem one(const Ctx& cx) {
    std::vector<u64> v(cx->deg, 0);
    v[0] = 1;
    return WittElem(cx, std::move(v), cx->N);
  }
  static WittElem from_int(const Ctx& cx, detail::i64 n) {
    std::vector<u64> v(cx->deg, 0);
    detail::i64 m = n % (detail::i64)cx->q;
    if (m < 0) m += (detail::i64)cx->q;
    v[0] = (u64)m;
    return WittElem(cx, std::move(v), cx->N);
  }

  void check(const WittElem& o) const {
    if (ctx.get() != o.ctx.get())
      throw usage_error("IncompatibleContexts", "elements from different contexts");
  }

  WittElem operator+(const WittElem& o) const {
    check(o);
    std::vector<u64> v(c.size());
    for (size_t i = 0; i < c.size(); ++i) v[i] = detail::addmod(c[i], o.c[i], ctx->q);
    return WittElem(ctx, std::move(v), std::min(prec, o.prec));
  }
  WittElem operator-(const WittElem& o) const {
    check(o);
    std::vector<u64> v(c.size());
    for (size_t i = 0; i < c.size(); ++i) v[i] = detail::submod(c[i], o.c[i], ctx->q);
    return WittElem(ctx, std::move(v), std::min(prec, o.prec));
  }
  WittElem operator-() const {
    std::vector<u64> v(c.size());
    for (size_t i = 0; i < c.size(); ++i) v[i] = c[i] ? ctx->q - c[i] : 0;
    return WittElem(ctx, std::move(v), prec);
  }
  WittElem operator*(const WittElem& o) const {
    check(o);
    // error(x*y) = p^{prec_x} e * y + p^{prec_y} f * x, so each operand's stored
    // valuation raises the other side's guarantee
    int va = ctx->raw_val(c), vb = ctx->raw_val(o.c);
    int pr = std::min({prec + vb, o.prec + va, ctx->N});
    return WittElem(ctx, ctx->raw_mul(c, o.c), pr);
  }

  // stored-representative valuation, capped at prec; nullopt means ">= prec"
  std::optional<int> valuation() const {
    int v = ctx->raw_val(c);
    if (v >= prec) return std::nullopt;
    return v;
  }
  bool is_unit() const {
    auto v = valuation();
    return v && *v == 0;
  }
  bool is_zero(int at_prec = -1) const {
    int g = at_prec < 0 ? prec : std::min(prec, at_prec);
    u64 m = detail::pow_u64(ctx->p, g);
    for (u64 v : c)
      if (v % m) return false;
    return true;
  }
  bool eq(const WittElem& o, int at_prec = -1) const {
    check(o);
    int g = std::min(prec, o.prec);
    if (at_prec >= 0) g = std::min(g, at_prec);
    u64 m = detail::pow_u64(ctx->p, g);
    for (size_t i = 0; i < c.size(); ++i)
      if ((detail::submod(c[i], o.c[i], ctx->q)) % m) return false;
    return true;
  }
  bool operator==(const WittElem& o) const { return eq(o); }

  // canonical representative truncated to the guarantee
  WittElem truncated() const {
    u64 m = detail::pow_u64(ctx->p, prec);
    std::vector<u64> v(c.size());
    for (size_t i = 0; i < c.size(); ++i) v[i] = c[i] % m;
    return WittElem(ctx, std::move(v), prec);
  }

  WittElem inv() const {
    auto v = valuation();
    if (!v || *v != 0)
      throw solver_error("NonUnit",
                         "inverse of non-unit (valuation " +
                             (v ? std::to_string(*v) : std::string(">=") + std::to_string(prec)) +
                             ")");
    return WittElem(ctx, ctx->raw_inv_unit(c), prec);
  }

  WittElem frobenius() const { return WittElem(ctx, ctx->raw_apply(ctx->sigma_matrix(), c), prec); }
  WittElem frobenius_inv() const {
    return WittElem(ctx, ctx->raw_apply(ctx->sigma_inv_matrix(), c), prec);
  }
  WittElem frobenius_pow(int k) const {
    int n = ctx->deg;
    int r = ((k % n) + n) % n;
    WittElem out = *this;
    if (r <= n - r) {
      for (int i = 0; i < r; ++i) out = out.frobenius();
    } else {
      for (int i = 0; i < n - r; ++i) out = out.frobenius_inv();
    }
    return out;
  }

  WittElem divide_exact(int k) const {
    if (k == 0) return *this;
    if (k < 0 || k > prec)
      throw solver_error("NotDivisible", "cannot certify division by p^" + std::to_string(k) +
                                             " at precision " + std::to_string(prec));
    WittElem t = truncated();
    u64 pk = detail::pow_u64(ctx->p, k);
    for (u64 v : t.c)
      if (v % pk)
        throw solver_error("NotDivisible",
                           "valuation " + std::to_string(ctx->raw_val(t.c)) + " < " + std::to_string(k));
    std::vector<u64> out(t.c.size());
    for (size_t i = 0; i < t.c.size(); ++i) out[i] = t.c[i] / pk;
    return WittElem(ctx, std::move(out), prec - k);
  }

  ResidueElem reduce_mod_p() const {
    std::vector<u32> v(c.size());
    for (size_t i = 0; i < c.size(); ++i) v[i] = (u32)(c[i] % ctx->p);
    return ResidueElem(ctx, std::move(v));
  }

  WittElem with_prec(int g) const { return WittElem(ctx, c, std::min(g, ctx->N)); }
};

inline WittElem operator*(detail::i64 k, const WittElem& x) {
  return WittElem::from_int(x.ctx, k) * x;
}

// Teichmueller lift: the unique t with t^{p^n} = t reducing to r.
inline WittElem teichmuller(const ResidueElem& r) {
  const Ctx& cx = r.ctx;
  if (r.is_zero()) return WittElem::zero(cx);
  std::vector<u64> t(cx->deg, 0);
  for (int i = 0; i < cx->deg; ++i) t[i] = r.c[i] % cx->p;
  // t <- sigma^{-1}(t^p) gains one digit per step
  for (int it = 0; it < cx->N; ++it) {
    std::vector<u64> tp = cx->raw_pow(t, cx->p);
    t = cx->raw_apply(cx->sigma_inv_matrix(), tp);
  }
  return WittElem(cx, std::move(t), cx->N);
}

// ---------------------------------------------------------------------------
// implementation
// ---------------------------------------------------------------------------

inline void WittContext::init_tables() {
  // reduction rows X^{deg+i} mod gpoly
  const int n = deg;
  xpow_.assign((size_t)std::max(0, n - 1) * n, 0);
  std::vector<u64> cur(n, 0); // X^n mod gpoly = -g[0..n-1]
  for (int i = 0; i < n; ++i) cur[i] = gpoly[i] ? q - gpoly[i] : 0;
  for (int row = 0; row < n - 1; ++row) {
    for (int i = 0; i < n; ++i) xpow_[(size_t)row * n + i] = cur[i];
    // cur <- X*cur mod gpoly
    u64 top = cur[n - 1];
    for (int i = n - 1; i > 0; --i) cur[i] = cur[i - 1];
    cur[0] = 0;
    if (top) {
      for (int i = 0; i < n; ++i)
        cur[i] = detail::addmod(cur[i], detail::mulmod(top, gpoly[i] ? q - gpoly[i] : 0, q), q);
    }
  }
  gp0_.assign(n + 1, 0);
  for (int i = 0; i <= n; ++i) gp0_[i] = (u32)(gpoly[i] % p);
  xpow0_.assign(xpow_.size(), 0);
  for (size_t i = 0; i < xpow_.size(); ++i) xpow0_[i] = (u32)(xpow_[i] % p);
  // fold interval for accumulation in raw_mul
  u128 qm1 = (u128)(q - 1) * (q - 1);
  u128 headroom = qm1 ? (((u128)0 - 1) / qm1) : ((u128)0 - 1);
  fold_every_ = headroom > (u128)(1 << 30) ? (1 << 30) : (int)headroom;
  if (fold_every_ < 1) fold_every_ = 1;
}

inline std::vector<u64> WittContext::raw_mul(const std::vector<u64>& a,
                                             const std::vector<u64>& b) const {
  const int n = deg;
  if (n == 1) return {detail::mulmod(a[0], b[0], q)};
  std::vector<u64> full(2 * n - 1, 0);
  for (int k = 0; k < 2 * n - 1; ++k) {
    int lo = std::max(0, k - n + 1), hi = std::min(k, n - 1);
    u128 acc = 0;
    int since = 0;
    for (int i = lo; i <= hi; ++i) {
      acc += (u128)a[i] * b[k - i];
      if (++since == fold_every_) {
        acc %= q;
        since = 0;
      }
    }
    full[k] = (u64)(acc % q);
  }
  std::vector<u128> acc(full.begin(), full.begin() + n);
  int since = 0;
  for (int k = n; k < 2 * n - 1; ++k) {
    u64 ck = full[k];
    if (!ck) continue;
    const u64* row = &xpow_[(size_t)(k - n) * n];
    for (int i = 0; i < n; ++i) acc[i] += (u128)ck * row[i];
    if (++since == fold_every_) {
      for (auto& a : acc) a %= q;
      since = 0;
    }
  }
  std::vector<u64> out(n);
  for (int i = 0; i < n; ++i) out[i] = (u64)(acc[i] % q);
  return out;
}

inline std::vector<u64> WittContext::raw_apply(const std::vector<u64>& mat,
                                               const std::vector<u64>& v) const {
  const int n = deg;
  std::vector<u128> acc(n, 0);
  int since = 0;
  for (int j = 0; j < n; ++j) {
    u64 vj = v[j];
    if (!vj) continue;
    const u64* col = &mat[(size_t)j * n]; // column j stored contiguously
    for (int i = 0; i < n; ++i) acc[i] += (u128)vj * col[i];
    if (++since == fold_every_) {
      for (auto& a : acc) a %= q;
      since = 0;
    }
  }
  std::vector<u64> out(n);
  for (int i = 0; i < n; ++i) out[i] = (u64)(acc[i] % q);
  return out;
}

inline std::vector<u64> WittContext::raw_pow(std::vector<u64> a, u64 e) const {
  std::vector<u64> r(deg, 0);
  r[0] = 1;
  while (e) {
    if (e & 1) r = raw_mul(r, a);
    a = raw_mul(a, a);
    e >>= 1;
  }
  return r;
}

inline std::vector<u64> WittContext::raw_eval_scalar_poly(const std::vector<u64>& coeffs,
                                                          const std::vector<u64>& x) const {
  // baby-step/giant-step evaluation, ~2*sqrt(m) ring multiplications
  const int n = deg;
  int m = (int)coeffs.size();
  if (m == 0) return std::vector<u64>(n, 0);
  int bs = 1;
  while (bs * bs < m) ++bs;
  std::vector<std::vector<u64>> pows(bs + 1);
  pows[0].assign(n, 0);
  pows[0][0] = 1;
  for (int i = 1; i <= bs; ++i) pows[i] = raw_mul(pows[i - 1], x);
  std::vector<u64> acc(n, 0);
  for (int block = (m - 1) / bs; block >= 0; --block) {
    acc = raw_mul(acc, pows[bs]);
    std::vector<u64> blockacc(n, 0);
    for (int i = 0; i < bs; ++i) {
      int idx = block * bs + i;
      if (idx >= m) break;
      u64 ci = coeffs[idx] % q;
      if (!ci) continue;
      for (int t = 0; t < n; ++t)
        blockacc[t] = detail::addmod(blockacc[t], detail::mulmod(ci, pows[i][t], q), q);
    }
    for (int t = 0; t < n; ++t) acc[t] = detail::addmod(acc[t], blockacc[t], q);
  }
  return acc;
}

inline int WittContext::raw_val(const std::vector<u64>& c) const {
  int best = N;
  for (u64 v : c) {
    if (!v) continue;
    int w = detail::val_u64(v, p);
    if (w < best) best = w;
    if (best == 0) break;
  }
  return best;
}

inline std::vector<u64> WittContext::raw_inv_unit(const std::vector<u64>& a) const {
  // residue inverse by extended Euclid, then Newton lifting: y <- y(2 - a y)
  std::vector<u32> a0(deg);
  for (int i = 0; i < deg; ++i) a0[i] = (u32)(a[i] % p);
  std::vector<u32> y0 = detail::fp_poly_invmod(a0, gp0_, p);
  std::vector<u64> y(deg);
  for (int i = 0; i < deg; ++i) y[i] = y0[i];
  int have = 1;
  while (have < N) {
    std::vector<u64> ay = raw_mul(a, y);
    std::vector<u64> two_minus(deg);
    for (int i = 0; i < deg; ++i) two_minus[i] = detail::submod(i == 0 ? 2 % q : 0, ay[i], q);
    y = raw_mul(y, two_minus);
    have *= 2;
  }
  return y;
}

inline std::vector<u64> WittContext::hensel_root_of_gpoly(const std::vector<u64>& g,
                                                          const std::vector<u32>& seed) const {
  std::vector<u64> s(deg);
  for (int i = 0; i < deg; ++i) s[i] = seed[i] % p;
  std::vector<u64> gd(g.size() - 1);
  for (size_t i = 1; i < g.size(); ++i) gd[i - 1] = detail::mulmod(g[i] % q, i % q, q);
  for (int it = 0; it < 2 * N + 4; ++it) {
    std::vector<u64> fs = raw_eval_scalar_poly(g, s);
    bool zero = true;
    for (u64 v : fs)
      if (v) { zero = false; break; }
    if (zero) return s;
    std::vector<u64> fds = raw_eval_scalar_poly(gd, s);
    std::vector<u64> corr = raw_mul(fs, raw_inv_unit(fds));
    for (int i = 0; i < deg; ++i) s[i] = detail::submod(s[i], corr[i], q);
  }
  throw internal_error("Hensel root refinement did not converge");
}

inline void WittContext::build_sigma_from_root(const std::vector<u64>& s,
                                               const std::vector<u64>& sinv) {
  const int n = deg;
  sig_.assign((size_t)n * n, 0);
  siginv_.assign((size_t)n * n, 0);
  std::vector<u64> cur(n, 0), curi(n, 0);
  cur[0] = 1;
  curi[0] = 1;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      sig_[(size_t)j * n + i] = cur[i];
      siginv_[(size_t)j * n + i] = curi[i];
    }
    if (j + 1 < n) {
      cur = raw_mul(cur, s);
      curi = raw_mul(curi, sinv);
    }
  }
}

inline const detail::FpSolver& WittContext::asw_solver(int k) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = asw_cache_.find(k);
  if (it != asw_cache_.end()) return it->second;
  detail::FpMat fk = frob0_;
  for (int i = 1; i < k; ++i) fk = detail::fp_matmul(fk, frob0_, p);
  for (int i = 0; i < deg; ++i) fk.at(i, i) = (u32)((fk.at(i, i) + p - 1) % p);
  detail::FpSolver solver;
  solver.build(fk, p);
  return asw_cache_.emplace(k, std::move(solver)).first->second;
}

inline const detail::FpSolver& WittContext::frob_solver() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!frob_lu_) {
    detail::FpSolver s;
    s.build(frob0_, p);
    frob_lu_ = std::move(s);
  }
  return *frob_lu_;
}

inline WittElem WittContext::zeta() const {
  std::vector<u64> v(deg, 0);
  if (deg == 1)
    v[0] = 1; // ring is Z/p^N, zeta = 1
  else
    v[1] = 1;
  return WittElem(shared_from_this(), std::move(v), N);
}
inline WittElem WittContext::zero() const { return WittElem::zero(shared_from_this()); }
inline WittElem WittContext::one() const { return WittElem::one(shared_from_this()); }
inline WittElem WittContext::from_int(detail::i64 v) const {
  return WittElem::from_int(shared_from_this(), v);
}

inline std::string WittContext::describe() const {
  return "W(F_" + std::to_string(p) + "^" + std::to_string(deg) + ")/p^" + std::to_string(N);
}

namespace detail_ctx {

// The deterministic modulus: minimize the tuple (a_1,...,a_n) lexicographically
// where f = X^n - a_1 X^{n-1} + a_2 X^{n-2} - ... among monic primitive
// irreducibles.  Degree 1 uses X - 1 (plain Z/p^N).
inline std::vector<u32> choose_residue_gpoly(u64 p, int n) {
  using namespace ::wittlift::detail;
  if (n == 1) return {(u32)(p - 1), 1};
  if (detail::pow_u64(p, n) >= (1ull << 62))
    throw usage_error("PrecisionOverflow", "p^n too large for the deterministic modulus search");
  u64 qm1 = pow_u64(p, n) - 1;
  std::vector<u64> fac = prime_factors(qm1);
  std::vector<u32> a(n, 0);
  while (true) {
    std::vector<u32> f(n + 1, 0);
    f[n] = 1;
    for (int j = 1; j <= n; ++j) {
      u64 sign = (j % 2) ? p - 1 : 1; // (-1)^j
      f[n - j] = (u32)(sign * a[j - 1] % p);
    }
    if (fp_poly_irreducible(f, p) && fp_poly_primitive(f, p, fac)) return f;
    int i = n - 1;
    while (i >= 0 && a[i] == p - 1) a[i--] = 0;
    if (i < 0) throw internal_error("primitive polynomial search exhausted");
    ++a[i];
  }
}

} // namespace detail_ctx

inline Ctx build_from_gpoly(u64 p, int N, const std::vector<u64>& g, const Ctx& par,
                            const std::vector<u64>& parent_image) {
  auto cx = std::shared_ptr<WittContext>(new WittContext());
  cx->p = p;
  cx->N = N;
  cx->q = detail::pow_u64(p, N);
  cx->deg = (int)g.size() - 1;
  cx->gpoly = g;
  cx->parent = par;
  cx->parent_image = parent_image;
  cx->init_tables();

  const int n = cx->deg;
  if (n == 1) {
    cx->sig_ = {1};
    cx->siginv_ = {1};
    cx->frob0_ = detail::FpMat(1, 1);
    cx->frob0_.at(0, 0) = 1;
    return cx;
  }

  // Frobenius: the gpoly root congruent to zeta^p (Hensel unique).
  std::vector<u64> zp = cx->raw_pow(cx->zeta().c, p);
  std::vector<u32> zp0(n);
  for (int i = 0; i < n; ++i) zp0[i] = (u32)(zp[i] % p);
  std::vector<u64> s = cx->hensel_root_of_gpoly(g, zp0);

  // residue Frobenius matrix from s mod p
  {
    detail::FpMat fr(n, n);
    std::vector<u32> s0(n);
    for (int i = 0; i < n; ++i) s0[i] = (u32)(s[i] % p);
    std::vector<u32> cur(n, 0);
    cur[0] = 1;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) fr.at(i, j) = cur[i];
      if (j + 1 < n) cur = detail::fp_poly_mulmod(cur, s0, cx->gp0_, p);
    }
    cx->frob0_ = fr;
  }
  detail::FpSolver frlu;
  frlu.build(cx->frob0_, p);
  std::vector<u32> zvec(n, 0);
  zvec[1] = 1;
  auto pre = frlu.solve(zvec);
  if (!pre) throw internal_error("residue Frobenius not invertible");
  std::vector<u64> sinv = cx->hensel_root_of_gpoly(g, *pre);

  cx->build_sigma_from_root(s, sinv);
  {
    std::lock_guard<std::mutex> lock(cx->mu_);
    cx->frob_lu_ = std::move(frlu);
  }

  // sanity: sigma(sigma^{-1}(zeta)) == zeta
  std::vector<u64> chk = cx->raw_apply(cx->sig_, cx->raw_apply(cx->siginv_, cx->zeta().c));
  if (chk != cx->zeta().c) throw internal_error("Frobenius inverse mismatch");
  return cx;
}

inline Ctx build_base_context(u64 p, int n, int N) {
  using namespace detail;
  std::vector<u32> gp0 = detail_ctx::choose_residue_gpoly(p, n);
  u64 q = pow_u64(p, N);
  std::vector<u64> ghat(gp0.begin(), gp0.end());

  if (n == 1) {
    std::vector<u64> g = {q - 1, 1};
    auto cx = build_from_gpoly(p, N, g, nullptr, {});
    const_cast<WittContext*>(cx.get())->teich_basis = true;
    return cx;
  }

  // provisional ring with the naive lift, then replace gpoly by the minimal
  // polynomial of the Teichmueller lift of zeta-bar so that the final class of
  // X is Teichmueller and sigma(zeta) = zeta^p exactly
  Ctx prov = build_from_gpoly(p, N, ghat, nullptr, {});
  std::vector<u64> tau = prov->zeta().c;
  u64 pn = pow_u64(p, n);
  int iters = (N + n - 1) / n + 1;
  for (int i = 0; i < iters; ++i) tau = prov->raw_pow(tau, pn);

  // gpoly = prod over conjugates (X - tau^{p^i}); coefficients are scalars
  std::vector<std::vector<u64>> conj(n);
  conj[0] = tau;
  for (int i = 1; i < n; ++i) conj[i] = prov->raw_pow(conj[i - 1], p);
  std::vector<std::vector<u64>> poly = {std::vector<u64>(n, 0)};
  poly[0][0] = 1;
  for (int t = 0; t < n; ++t) {
    std::vector<u64> neg(n);
    for (int i = 0; i < n; ++i) neg[i] = conj[t][i] ? q - conj[t][i] : 0;
    std::vector<std::vector<u64>> next(poly.size() + 1, std::vector<u64>(n, 0));
    for (size_t d = 0; d < poly.size(); ++d) {
      for (int i = 0; i < n; ++i)
        next[d + 1][i] = addmod(next[d + 1][i], poly[d][i], q);
      std::vector<u64> prod = prov->raw_mul(poly[d], neg);
      for (int i = 0; i < n; ++i) next[d][i] = addmod(next[d][i], prod[i], q);
    }
    poly = std::move(next);
  }
  std::vector<u64> g(n + 1, 0);
  for (int d = 0; d <= n; ++d) {
    for (int i = 1; i < n; ++i)
      if (poly[d][i] != 0) throw internal_error("Teichmueller modulus not rational");
    g[d] = poly[d][0];
  }
  if (g[n] != 1) throw internal_error("Teichmueller modulus not monic");

  auto cx = build_from_gpoly(p, N, g, nullptr, {});
  const_cast<WittContext*>(cx.get())->teich_basis = true;
  // Teichmueller basis: sigma is exactly zeta -> zeta^p
  std::vector<u64> zp = cx->raw_pow(cx->zeta().c, p);
  std::vector<u64> viasig = cx->raw_apply(cx->sigma_matrix(), cx->zeta().c);
  if (zp != viasig) throw internal_error("sigma(zeta) != zeta^p in Teichmueller basis");
  return cx;
}

// Tower step: residue field degree m -> m*p via an Artin-Schreier extension
// Y^p - Y - gamma with Tr(gamma) != 0, flattened back to a single modulus.
inline Ctx build_tower_context(const Ctx& par) {
  using namespace detail;
  const u64 p = par->p;
  const int m = par->deg;
  const int n = m * (int)p;
  const auto& gp0 = par->residue_gpoly();

  // gamma = least power of zeta-bar with nonzero absolute trace
  std::vector<u32> zbar(m, 0);
  if (m == 1)
    zbar[0] = 1;
  else
    zbar[1] = 1;
  std::vector<u32> gamma;
  {
    std::vector<u32> pw(m, 0);
    pw[0] = 1;
    for (int j = 0; j < m; ++j) {
      // absolute trace of pw = sum of Frobenius orbit
      std::vector<u32> t = pw, acc(m, 0);
      for (int i = 0; i < m; ++i) {
        for (int k = 0; k < m; ++k) acc[k] = (u32)((acc[k] + t[k]) % p);
        t = fp_poly_powmod(t, p, gp0, p);
      }
      bool nonzero = false;
      for (u32 v : acc)
        if (v % p) nonzero = true;
      if (nonzero) {
        gamma = pw;
        break;
      }
      pw = fp_poly_mulmod(pw, zbar, gp0, p);
    }
  }
  if (gamma.empty()) throw internal_error("no trace-one element found");

  // tower arithmetic: vectors of length p over F_{p^m}, modulo Y^p - Y - gamma
  auto tower_mul = [&](const std::vector<std::vector<u32>>& a,
                       const std::vector<std::vector<u32>>& b) {
    int P = (int)p;
    std::vector<std::vector<u32>> r(2 * P - 1, std::vector<u32>(m, 0));
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) {
        auto prod = fp_poly_mulmod(a[i], b[j], gp0, p);
        for (int k = 0; k < m; ++k) r[i + j][k] = (u32)((r[i + j][k] + prod[k]) % p);
      }
    for (int d = 2 * P - 2; d >= P; --d) {
      // Y^d = Y^{d-P} (Y + gamma)
      for (int k = 0; k < m; ++k) r[d - P + 1][k] = (u32)((r[d - P + 1][k] + r[d][k]) % p);
      auto g = fp_poly_mulmod(r[d], gamma, gp0, p);
      for (int k = 0; k < m; ++k) r[d - P][k] = (u32)((r[d - P][k] + g[k]) % p);
      r[d].assign(m, 0);
    }
    r.resize(P);
    return r;
  };
  auto flatten = [&](const std::vector<std::vector<u32>>& a) {
    std::vector<u32> out(n, 0);
    for (int i = 0; i < (int)p; ++i)
      for (int k = 0; k < m; ++k) out[i * m + k] = a[i][k];
    return out;
  };

  // generator theta = Y + c*zeta-bar with minimal polynomial of full degree
  std::vector<u32> minpoly;
  std::vector<u32> zeta_in_theta_basis;
  for (u32 cshift = 1; cshift <= (u32)p; ++cshift) {
    std::vector<std::vector<u32>> theta((size_t)p, std::vector<u32>(m, 0));
    theta[1][0] = 1;
    std::vector<u32> sz = zbar;
    for (int k = 0; k < m; ++k) theta[0][k] = (u32)((u64)cshift % p * sz[k] % p);
    // Krylov rows theta^0 .. theta^n
    std::vector<std::vector<u32>> rows;
    std::vector<std::vector<u32>> cur((size_t)p, std::vector<u32>(m, 0));
    cur[0][0] = 1;
    for (int i = 0; i <= n; ++i) {
      rows.push_back(flatten(cur));
      if (i < n) cur = tower_mul(cur, theta);
    }
    // eliminate: find dependency of theta^n on lower powers, and express
    // zeta-bar in the theta power basis (solved from the same echelon form)
    detail::FpMat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A.at(i, j) = rows[j][i]; // columns are theta^j
    detail::FpSolver sol;
    sol.build(A, p);
    if ((int)sol.pivot_cols.size() != n) continue; // theta does not generate
    auto dep = sol.solve(rows[n]);
    std::vector<u32> zflat(n, 0);
    for (int k = 0; k < m; ++k) zflat[k] = zbar[k];
    auto zexp = sol.solve(zflat);
    if (!dep || !zexp) continue;
    minpoly.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) minpoly[i] = (u32)((p - (*dep)[i] % p) % p);
    minpoly[n] = 1;
    zeta_in_theta_basis = *zexp;
    break;
  }
  if (minpoly.empty()) throw internal_error("no generator found for tower extension");

  std::vector<u64> g(minpoly.begin(), minpoly.end());
  Ctx cx = build_from_gpoly(par->p, par->N, g, par, {});
  // exact embedding of the parent zeta: Hensel root of the parent modulus
  auto* mcx = const_cast<WittContext*>(cx.get());
  mcx->parent_image = cx->hensel_root_of_gpoly(par->gpoly, zeta_in_theta_basis);
  return cx;
}

inline Ctx WittContext::make(u64 p, int n, int N) {
  using namespace detail;
  if (p < 3 || (p & 1) == 0 || !is_prime_u64(p))
    throw usage_error("NotOddPrime", "p must be an odd prime, got " + std::to_string(p));
  if (n < 1) throw usage_error("BadDegree", "residue degree must be >= 1");
  if (N < 1) throw usage_error("BadPrecision", "precision must be >= 1");
  if (p >= (1u << 20)) throw usage_error("PrecisionOverflow", "p too large");
  {
    u128 qq = 1;
    for (int i = 0; i < N; ++i) {
      qq *= p;
      if (qq >= ((u128)1 << 62))
        throw usage_error("PrecisionOverflow", "p^N must fit below 2^62");
    }
  }
  static std::mutex reg_mu;
  static std::map<std::tuple<u64, int, int>, Ctx> registry;
  std::lock_guard<std::mutex> lock(reg_mu);
  auto key = std::make_tuple(p, n, N);
  auto it = registry.find(key);
  if (it != registry.end()) return it->second;
  Ctx cx = build_base_context(p, n, N);
  registry.emplace(key, cx);
  return cx;
}

inline Ctx WittContext::at_precision(int N2) const {
  if (N2 == N) return shared_from_this();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = prec_siblings_.find(N2);
    if (it != prec_siblings_.end()) return it->second;
  }
  Ctx out;
  if (!parent) {
    if (teich_basis) {
      out = WittContext::make(p, deg, N2);
    } else {
      // re-lift the stored modulus at the new precision
      u64 q2 = detail::pow_u64(p, N2);
      std::vector<u64> g2(gpoly.size());
      for (size_t i = 0; i < gpoly.size(); ++i) g2[i] = gpoly[i] % q2;
      out = build_from_gpoly(p, N2, g2, nullptr, {});
    }
  } else {
    out = parent->at_precision(N2)->extended();
  }
  std::lock_guard<std::mutex> lock(mu_);
  prec_siblings_[N2] = out;
  return out;
}

inline Ctx WittContext::extended() const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (child_) return child_;
  }
  Ctx c = build_tower_context(shared_from_this());
  std::lock_guard<std::mutex> lock(mu_);
  if (!child_) child_ = c;
  return child_;
}

inline Ctx WittContext::from_gpoly(u64 p, int N, const std::vector<u64>& g) {
  if (p < 3 || (p & 1) == 0 || !detail::is_prime_u64(p))
    throw usage_error("NotOddPrime", "p must be an odd prime");
  if (g.size() < 2 || g.back() != 1) throw usage_error("BadModulus", "gpoly must be monic");
  std::vector<u32> g0(g.size());
  for (size_t i = 0; i < g.size(); ++i) g0[i] = (u32)(g[i] % p);
  if (!detail::fp_poly_irreducible(g0, p))
    throw usage_error("BadModulus", "gpoly is not irreducible mod p");
  return build_from_gpoly(p, N, g, nullptr, {});
}

// ---------------------------------------------------------------------------
// embeddings
// ---------------------------------------------------------------------------

// Evaluate x's coefficient polynomial at the image of its context generator.
inline WittElem embed_via_image(const WittElem& x, const Ctx& big,
                                const std::vector<u64>& image) {
  std::vector<u64> out = big->raw_eval_scalar_poly(x.c, image);
  return WittElem(big, std::move(out), x.prec);
}

// Image of `anc`'s generator inside `cx`, walking the tower chain; cached on
// the destination context.
inline std::vector<u64> generator_image_in(const Ctx& anc, const Ctx& cx) {
  if (anc.get() == cx.get()) return cx->zeta().c;
  {
    std::lock_guard<std::mutex> lock(cx->embed_mu_);
    auto it = cx->embed_cache_.find(anc.get());
    if (it != cx->embed_cache_.end()) return it->second;
  }
  std::vector<const WittContext*> chain;
  const WittContext* cur = cx.get();
  while (cur && cur != anc.get()) {
    chain.push_back(cur);
    cur = cur->parent.get();
  }
  if (!cur) throw usage_error("IncompatibleContexts", "contexts are not in one tower");
  // walk top-down: image of anc-zeta in each level
  std::vector<u64> img = anc->zeta().c;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    // img lives in (*it)->parent; push it through the stored generator image
    const WittContext* level = *it;
    img = level->raw_eval_scalar_poly(img, level->parent_image);
  }
  std::lock_guard<std::mutex> lock(cx->embed_mu_);
  cx->embed_cache_[anc.get()] = img;
  return img;
}

inline WittElem embed_up_tower(const WittElem& x, const Ctx& big) {
  if (x.ctx.get() == big.get()) return x;
  const int m = x.ctx->deg, n = big->deg;
  // amortize repeated embeddings through a cached power matrix
  const std::vector<u64>* matp = nullptr;
  {
    std::lock_guard<std::mutex> lock(big->embed_mu_);
    auto it = big->embed_matrix_cache_.find(x.ctx.get());
    if (it != big->embed_matrix_cache_.end()) matp = &it->second;
  }
  if (!matp) {
    auto img = generator_image_in(x.ctx, big);
    std::vector<u64> mat((size_t)m * n, 0);
    std::vector<u64> cur(n, 0);
    cur[0] = 1;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) mat[(size_t)j * n + i] = cur[i];
      if (j + 1 < m) cur = big->raw_mul(cur, img);
    }
    std::lock_guard<std::mutex> lock(big->embed_mu_);
    matp = &big->embed_matrix_cache_.emplace(x.ctx.get(), std::move(mat)).first->second;
  }
  std::vector<u128> acc(n, 0);
  u64 q = big->q;
  int since = 0;
  for (int j = 0; j < m; ++j) {
    u64 vj = x.c[j];
    if (!vj) continue;
    const u64* col = matp->data() + (size_t)j * n;
    for (int i = 0; i < n; ++i) acc[i] += (u128)vj * col[i];
    if (++since == big->fold_interval()) {
      for (auto& a : acc) a %= q;
      since = 0;
    }
  }
  std::vector<u64> out(n);
  for (int i = 0; i < n; ++i) out[i] = (u64)(acc[i] % q);
  return WittElem(big, std::move(out), x.prec);
}

// General embedding W(F_{p^n}) -> W(F_{p^m}) for n | m, same p and N.
// Among the residue roots of the small modulus the lexicographically least
// coefficient vector is chosen, then Hensel-lifted; the result commutes with
// sigma and is deterministic.
inline WittElem embed(const WittElem& x, const Ctx& big) {
  const Ctx& small = x.ctx;
  if (small.get() == big.get()) return x;
  // tower fast path
  {
    const WittContext* cur = big.get();
    while (cur) {
      if (cur == small.get()) return embed_up_tower(x, big);
      cur = cur->parent.get();
    }
  }
  if (small->p != big->p || small->N != big->N)
    throw usage_error("IncompatibleContexts", "embedding requires equal p and N");
  if (big->deg % small->deg != 0)
    throw usage_error("IncompatibleContexts", "residue degree must divide");
  if (small->deg == 1) {
    std::vector<u64> v(big->deg, 0);
    // image of zeta_small = 1 (n = 1 context)
    return embed_via_image(x, big, big->one().c);
  }
  const int n = small->deg, m = big->deg;
  // subfield F_{p^n} inside F_{p^m}: kernel of Frob^n - 1
  detail::FpMat fk = big->frob_matrix();
  for (int i = 1; i < n; ++i) fk = detail::fp_matmul(fk, big->frob_matrix(), big->p);
  for (int i = 0; i < m; ++i) fk.at(i, i) = (u32)((fk.at(i, i) + big->p - 1) % big->p);
  detail::FpSolver sol;
  sol.build(fk, big->p);
  auto kern = sol.kernel();
  if ((int)kern.size() != n) throw internal_error("subfield dimension mismatch");
  // scan the subfield for roots of the small residue modulus, keep the
  // lexicographically least coefficient vector
  const auto& gp0s = small->residue_gpoly();
  u64 p = big->p;
  u64 count = detail::pow_u64(p, n);
  std::optional<std::vector<u32>> best;
  for (u64 idx = 1; idx < count; ++idx) {
    std::vector<u32> cand(m, 0);
    u64 t = idx;
    for (int j = 0; j < n; ++j) {
      u32 cj = (u32)(t % p);
      t /= p;
      if (!cj) continue;
      for (int i = 0; i < m; ++i) cand[i] = (u32)((cand[i] + (u64)cj * kern[j][i]) % p);
    }
    // evaluate gp0s at cand over the big residue field
    std::vector<u32> acc(m, 0), cur(m, 0);
    cur[0] = 1;
    for (size_t d = 0; d < gp0s.size(); ++d) {
      if (gp0s[d]) {
        for (int i = 0; i < m; ++i) acc[i] = (u32)((acc[i] + (u64)gp0s[d] * cur[i]) % p);
      }
      if (d + 1 < gp0s.size())
        cur = detail::fp_poly_mulmod(cur, cand, big->residue_gpoly(), p);
    }
    bool zero = true;
    for (u32 v : acc)
      if (v % p) { zero = false; break; }
    if (!zero) continue;
    if (!best || cand < *best) best = cand;
  }
  if (!best) throw internal_error("no residue root found for embedding");
  std::vector<u64> img = big->hensel_root_of_gpoly(
      std::vector<u64>(small->gpoly.begin(), small->gpoly.end()), *best);
  return embed_via_image(x, big, img);
}

inline ResidueElem embed_residue(const ResidueElem& r, const Ctx& big) {
  WittElem t = teichmuller(r);
  return embed(t, big).reduce_mod_p();
}

} // namespace wittlift
