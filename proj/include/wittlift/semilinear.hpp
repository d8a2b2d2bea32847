#pragma once

// Solvers for sigma-twisted equations: sigma^k(beta) - beta = x, with optional
// unit side-conditions searched over the solution coset, and Hensel lifting of
// simple polynomial roots.
//
// The equation is lifted digit by digit: writing beta = sum p^j b_j, layer j
// reduces to the residue equation b^{p^k} - b = c_j.  Such an equation is
// solvable in F_{p^m} iff the relative trace of c_j to F_{p^gcd(k,m)}
// vanishes; when it does not, the residue field is extended by a factor of p,
// which kills the trace (characteristic p) and unblocks the layer.  Each
// extension buys exactly one more certified digit for generic right-hand
// sides, so the achievable guarantee is v(trace) + #extensions; the returned
// solution records the guarantee it actually certifies.

#include "wittlift/witt.hpp"

#include <functional>

namespace wittlift {

struct AswOptions {
  int target_prec = -1; // default: the right-hand side's guarantee
  int max_degree = -1;  // residue-degree cap for extensions; default 1024
};

constexpr int ASW_DEFAULT_MAX_DEGREE = 1024;

struct AswSolution {
  WittElem beta;
  int extension_degree_used = 0;
  int kernel_degree = 0;
  int guarantee = 0; // sigma^k(beta) - beta = x holds modulo p^guarantee
};

namespace detail_asw {

inline std::vector<u32> residue_digit(const WittElem& r, int j) {
  const Ctx& cx = r.ctx;
  u64 pj = detail::pow_u64(cx->p, j);
  std::vector<u32> out(cx->deg);
  for (int i = 0; i < cx->deg; ++i) out[i] = (u32)(r.c[i] / pj % cx->p);
  return out;
}

} // namespace detail_asw

// Solve sigma^k(beta) - beta = x; enlarges the residue field on demand.
inline AswSolution solve_asw(int k, const WittElem& x, AswOptions opts = {}) {
  if (k < 1) throw usage_error("BadKernelDegree", "k must be >= 1");
  Ctx cx = x.ctx;
  WittElem rhs = x;
  // the kernel W(F_{p^k}) must live in the ambient ring
  if (cx->deg % k != 0) {
    int m = cx->deg;
    int l = m / std::__gcd(m, k) * k;
    Ctx big = WittContext::make(cx->p, l, cx->N);
    rhs = embed(rhs, big);
    cx = big;
  }
  int target = opts.target_prec < 0 ? rhs.prec : std::min(opts.target_prec, rhs.prec);
  if (target < 1) throw solver_error("PrecisionExhausted", "no digits left to solve for");
  int max_degree = opts.max_degree > 0 ? opts.max_degree : ASW_DEFAULT_MAX_DEGREE;

  WittElem beta = WittElem::zero(cx).with_prec(target);
  WittElem resid = rhs;
  int layer = 0;
  while (layer < target) {
    std::vector<u32> cbar = detail_asw::residue_digit(resid.truncated(), layer);
    const detail::FpSolver& solver = cx->asw_solver(k);
    auto sol = solver.solve(cbar);
    if (!sol) {
      if (cx->deg * (int)cx->p > max_degree) break;
      Ctx big = cx->extended();
      rhs = embed_up_tower(rhs, big);
      beta = embed_up_tower(beta, big);
      cx = big;
      resid = rhs - (beta.frobenius_pow(k) - beta);
      continue;
    }
    std::vector<u64> lift(cx->deg);
    u64 pj = detail::pow_u64(cx->p, layer);
    for (int i = 0; i < cx->deg; ++i) lift[i] = (u64)(*sol)[i] * pj;
    beta = beta + WittElem(cx, std::move(lift), cx->N).with_prec(target);
    resid = rhs - (beta.frobenius_pow(k) - beta);
    ++layer;
  }
  AswSolution out;
  out.beta = beta.with_prec(layer > 0 ? std::min(layer, target) : 0);
  if (layer == 0)
    throw solver_error("PrecisionExhausted",
                       "layer 0 unsolvable within the degree cap " + std::to_string(max_degree));
  out.extension_degree_used = cx->deg;
  out.kernel_degree = k;
  out.guarantee = out.beta.prec;
  // the defining identity must hold at the certified guarantee
  WittElem check = out.beta.frobenius_pow(k) - out.beta - embed_up_tower(rhs, cx);
  if (!check.is_zero(out.guarantee)) throw internal_error("ASW residual nonzero at guarantee");
  return out;
}

// Teichmueller representatives of F_{p^k} inside cx, in lexicographic order of
// residue coefficient vectors (zero first).  Cached per (context, k): the
// embedding scan is the expensive part.
inline const std::vector<WittElem>& kernel_translates(const Ctx& cx, int k) {
  static std::mutex mu;
  static std::map<std::pair<const WittContext*, int>, std::vector<WittElem>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({cx.get(), k});
    if (it != cache.end()) return it->second;
  }
  Ctx base = WittContext::make(cx->p, k, cx->N);
  WittElem gen = embed(base->zeta(), cx); // Teichmueller of order p^k - 1
  u64 count = detail::pow_u64(cx->p, k);
  std::vector<std::pair<std::vector<u32>, WittElem>> list;
  list.reserve(count);
  list.emplace_back(WittElem::zero(cx).reduce_mod_p().c, WittElem::zero(cx));
  WittElem cur = WittElem::one(cx);
  for (u64 i = 0; i + 1 < count; ++i) {
    auto key = cur.reduce_mod_p().c;
    std::reverse(key.begin(), key.end()); // low digit varies fastest
    list.emplace_back(std::move(key), cur);
    cur = cur * gen;
  }
  std::sort(list.begin(), list.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<WittElem> out;
  out.reserve(list.size());
  for (auto& pr : list) out.push_back(std::move(pr.second));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(std::make_pair(cx.get(), k), std::move(out)).first->second;
}

using UnitCondition = std::function<WittElem(const WittElem&)>;

// Solve sigma^k(beta) - beta = x such that every listed expression of beta is
// a unit.  Candidates run over beta0 + t (t Teichmueller in W(F_{p^k})), then
// over a second p-adic refinement layer beta0 + t1 + p*t2.
inline AswSolution solve_asw_with_conditions(int k, const WittElem& x,
                                             const std::vector<UnitCondition>& conditions,
                                             AswOptions opts = {}) {
  AswSolution base = solve_asw(k, x, opts);
  const Ctx& cx = base.beta.ctx;
  auto admissible = [&](const WittElem& cand) {
    for (const auto& cond : conditions) {
      WittElem v = cond(cand);
      if (!v.is_unit()) return false;
    }
    return true;
  };
  std::vector<WittElem> ts = kernel_translates(cx, k);
  for (const WittElem& t : ts) {
    WittElem cand = base.beta + t;
    if (admissible(cand)) {
      base.beta = cand;
      return base;
    }
  }
  for (const WittElem& t1 : ts) {
    for (const WittElem& t2 : ts) {
      WittElem cand = base.beta + t1 + WittElem::from_int(cx, (detail::i64)cx->p) * t2;
      if (admissible(cand)) {
        base.beta = cand;
        return base;
      }
    }
  }
  throw solver_error("NoAdmissibleTranslate",
                     "no kernel translate satisfies all unit conditions");
}

// ---------------------------------------------------------------------------
// Hensel lifting
// ---------------------------------------------------------------------------

inline WittElem eval_poly(const std::vector<WittElem>& coeffs, const WittElem& x) {
  WittElem acc = WittElem::zero(x.ctx);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline std::vector<WittElem> derivative(const std::vector<WittElem>& coeffs) {
  std::vector<WittElem> out;
  for (size_t i = 1; i < coeffs.size(); ++i)
    out.push_back(WittElem::from_int(coeffs[i].ctx, (detail::i64)i) * coeffs[i]);
  if (out.empty() && !coeffs.empty()) out.push_back(WittElem::zero(coeffs[0].ctx));
  return out;
}

// Unique root congruent to seed of a polynomial whose reduction has seed as a
// simple root.  Coefficients are first divided by p^{min valuation}.
inline WittElem hensel_root(std::vector<WittElem> coeffs, const ResidueElem& seed) {
  if (coeffs.empty()) throw usage_error("BadPolynomial", "empty polynomial");
  const Ctx& cx = coeffs[0].ctx;
  int strip = cx->N;
  for (const auto& c : coeffs) strip = std::min(strip, c.ctx->raw_val(c.truncated().c));
  if (strip > 0) {
    for (auto& c : coeffs) c = c.divide_exact(strip);
  }
  int work_prec = cx->N;
  for (const auto& c : coeffs) work_prec = std::min(work_prec, c.prec);
  if (work_prec < 1) throw solver_error("PrecisionExhausted", "no precision after normalization");

  WittElem b = teichmuller(seed).with_prec(work_prec);
  {
    WittElem f0 = eval_poly(coeffs, b);
    if (!f0.is_zero(1)) throw solver_error("SeedNotRoot", "f(seed) != 0 mod p");
    WittElem f1 = eval_poly(derivative(coeffs), b);
    if (!f1.is_unit()) throw solver_error("SeedNotSimple", "f'(seed) is not a unit");
  }
  for (int it = 0; it < 2 * cx->N + 4; ++it) {
    WittElem fb = eval_poly(coeffs, b);
    if (fb.is_zero(work_prec)) break;
    WittElem fpb = eval_poly(derivative(coeffs), b);
    b = b - fb * fpb.inv();
  }
  WittElem fb = eval_poly(coeffs, b);
  if (!fb.is_zero(work_prec)) throw internal_error("Newton iteration failed to converge");
  return b.with_prec(work_prec);
}

} // namespace wittlift
