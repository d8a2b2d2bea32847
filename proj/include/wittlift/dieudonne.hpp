#pragma once

// Dieudonne modules over truncated Witt rings: a free module of rank 2g with a
// sigma-linear Frobenius and sigma^{-1}-linear Verschiebung satisfying
// F V = V F = p.  F is stored as the matrix M_F with F(v) = M_F * sigma(v),
// so a module map with matrix M is F-equivariant iff M*M_F = M_F' * sigma(M).
//
// Lattices are given by generator columns and reduced to a canonical
// triangular form by valuation pivoting (the coefficient ring is local with
// ideals (p^k)), which yields membership, containment, colength and
// torsion-freeness in one routine.

#include "wittlift/matrix.hpp"
#include "wittlift/semilinear.hpp"

#include <optional>
#include <string>

namespace wittlift {

struct DieudonneModule {
  Ctx ctx;
  int g = 0; // half-rank; basis order e1,f1,...,eg,fg
  WittMatrix F, V;

  int rank() const { return 2 * g; }

  // F(v) = F * sigma(v), V(v) = V * sigma^{-1}(v)
  std::vector<WittElem> apply_F(const std::vector<WittElem>& v) const {
    std::vector<WittElem> s(v.size(), WittElem::zero(ctx));
    for (size_t i = 0; i < v.size(); ++i) s[i] = v[i].frobenius();
    return F.apply(s);
  }
  std::vector<WittElem> apply_V(const std::vector<WittElem>& v) const {
    std::vector<WittElem> s(v.size(), WittElem::zero(ctx));
    for (size_t i = 0; i < v.size(); ++i) s[i] = v[i].frobenius_inv();
    return V.apply(s);
  }

  // F V = V F = p on the underlying module
  bool fv_relation_holds(int at_prec = -1) const {
    WittMatrix lhs = F * V.frobenius(1);
    WittMatrix rhs = WittMatrix::identity(ctx, rank()).scaled(WittElem::from_int(ctx, (detail::i64)ctx->p));
    if (!lhs.eq(rhs, at_prec)) return false;
    WittMatrix lhs2 = V * F.frobenius(-1);
    return lhs2.eq(rhs, at_prec);
  }

  DieudonneModule embedded(const Ctx& big) const {
    return DieudonneModule{big, g, F.embedded(big), V.embedded(big)};
  }
};

// (D0, F0, V0)^{\oplus g}: per block F0 = V0 = [[0,p],[1,0]]
inline DieudonneModule make_elliptic_power(const Ctx& cx, int g) {
  if (g < 1) throw usage_error("BadRank", "g must be >= 1");
  DieudonneModule d;
  d.ctx = cx;
  d.g = g;
  d.F = WittMatrix(cx, 2 * g, 2 * g);
  WittElem p = WittElem::from_int(cx, (detail::i64)cx->p);
  for (int b = 0; b < g; ++b) {
    d.F.at(2 * b, 2 * b + 1) = p;
    d.F.at(2 * b + 1, 2 * b) = WittElem::one(cx);
  }
  d.V = d.F;
  return d;
}

inline DieudonneModule make_standard_surface(const WittElem& x) {
  const Ctx& cx = x.ctx;
  DieudonneModule d = make_elliptic_power(cx, 2);
  d.F.at(1, 3) = x;
  d.V.at(0, 2) = -x.frobenius_inv();
  return d;
}

inline DieudonneModule make_standard_threefold(const WittElem& x, const WittElem& y,
                                               const WittElem& z) {
  x.check(y);
  x.check(z);
  const Ctx& cx = x.ctx;
  DieudonneModule d = make_elliptic_power(cx, 3);
  d.F.at(1, 3) = x;
  d.F.at(3, 5) = y;
  d.F.at(1, 5) = z;
  d.V.at(0, 2) = -x.frobenius_inv();
  d.V.at(2, 4) = -y.frobenius_inv();
  d.V.at(0, 4) = -z.frobenius_inv();
  return d;
}

// Basis of {v : F(v) = 0 mod p}; substituting w = sigma(v) reduces to the
// kernel of the residue matrix of M_F.
inline ResidueMatrix kernel_of_frobenius_mod_p(const DieudonneModule& d) {
  ResidueMatrix m = reduce_mod_p(d.F);
  int n = d.rank();
  // column-style kernel over the residue field: solve M w = 0 by echelonizing rows
  // build augmented row echelon of M, track free columns
  ResidueMatrix a = m;
  std::vector<int> pivot_of_col(n, -1);
  int r = 0;
  for (int c = 0; c < n && r < n; ++c) {
    int pr = -1;
    for (int i = r; i < n; ++i)
      if (!a.at(i, c).is_zero()) { pr = i; break; }
    if (pr < 0) continue;
    for (int j = 0; j < n; ++j) std::swap(a.at(r, j), a.at(pr, j));
    ResidueElem inv = a.at(r, c).inv();
    for (int j = 0; j < n; ++j) a.at(r, j) = a.at(r, j) * inv;
    for (int i = 0; i < n; ++i) {
      if (i == r || a.at(i, c).is_zero()) continue;
      ResidueElem f = a.at(i, c);
      for (int j = 0; j < n; ++j) a.at(i, j) = a.at(i, j) - a.at(r, j) * f;
    }
    pivot_of_col[c] = r;
    ++r;
  }
  std::vector<std::vector<ResidueElem>> basis;
  for (int c = 0; c < n; ++c) {
    if (pivot_of_col[c] >= 0) continue;
    std::vector<ResidueElem> w((size_t)n, ResidueElem::zero(d.ctx));
    w[c] = ResidueElem::one(d.ctx);
    for (int cc = 0; cc < n; ++cc)
      if (pivot_of_col[cc] >= 0) {
        ResidueElem coef = a.at(pivot_of_col[cc], c);
        if (!coef.is_zero()) w[cc] = ResidueElem::zero(d.ctx) - coef;
      }
    basis.push_back(std::move(w));
  }
  // v = sigma^{-1}(w)
  ResidueMatrix out(d.ctx, n, (int)basis.size());
  for (int j = 0; j < (int)basis.size(); ++j)
    for (int i = 0; i < n; ++i) out.at(i, j) = basis[j][i].frobenius(-1);
  return out;
}

// ---------------------------------------------------------------------------
// lattices
// ---------------------------------------------------------------------------

struct LatticePivot {
  int row = 0, col = 0, val = 0;
};

struct TriangularForm {
  WittMatrix m;                    // canonical column form
  std::vector<LatticePivot> pivots;
  int prec = 0;                    // precision the form is certified at
  bool full_rank = false;          // #pivots == #columns and vals certified
};

struct Lattice {
  DieudonneModule parent;
  WittMatrix gens; // rank x m generator columns

  int ambient_rank() const { return parent.rank(); }
};

// Canonical triangular form by valuation pivoting: for each row pick the
// remaining column whose entry has minimal valuation, normalize the pivot to
// p^v, eliminate the row from other columns, and reduce entries above pivots.
inline TriangularForm triangularize(const WittMatrix& gens) {
  TriangularForm out;
  WittMatrix m = gens;
  const Ctx& cx = m.ctx;
  int prec = m.min_prec();
  out.prec = prec;
  int rows = m.rows, cols = m.cols;
  int lead = 0;
  for (int r = 0; r < rows && lead < cols; ++r) {
    int best = -1, bestval = 1 << 30;
    for (int c = lead; c < cols; ++c) {
      const WittElem& e = m.at(r, c);
      int v = cx->raw_val(e.truncated().c);
      v = std::min(v, e.prec);
      if (v < std::min(e.prec, prec) && v < bestval) {
        bestval = v;
        best = c;
      }
    }
    if (best < 0) continue; // row invisible at this precision
    for (int i = 0; i < rows; ++i) std::swap(m.at(i, lead), m.at(i, best));
    // normalize pivot column so the pivot entry is exactly p^v
    WittElem unit = m.at(r, lead).divide_exact(bestval);
    WittElem uinv = unit.inv();
    for (int i = 0; i < rows; ++i) m.at(i, lead) = m.at(i, lead) * uinv;
    // eliminate this row from the other columns; entries are reduced using
    // their own guarantee so higher-precision content is not discarded
    for (int c = 0; c < cols; ++c) {
      if (c == lead) continue;
      WittElem e = m.at(r, c);
      int v = cx->raw_val(e.truncated().c);
      if (v >= e.prec) continue; // zero at its own precision
      if (c > lead) {
        // full elimination: entry valuation >= pivot valuation by pivot choice
        WittElem f = e.divide_exact(bestval);
        for (int i = 0; i < rows; ++i) m.at(i, c) = m.at(i, c) - f * m.at(i, lead);
      } else {
        // canonical reduction of earlier columns modulo the pivot
        u64 pv = detail::pow_u64(cx->p, bestval);
        WittElem t = e.truncated();
        std::vector<u64> qv(t.c.size());
        for (size_t i = 0; i < t.c.size(); ++i) qv[i] = t.c[i] / pv;
        WittElem f(cx, std::move(qv), std::max(0, e.prec - bestval));
        for (int i = 0; i < rows; ++i) m.at(i, c) = m.at(i, c) - f * m.at(i, lead);
      }
    }
    out.pivots.push_back({r, lead, bestval});
    ++lead;
  }
  out.m = m;
  out.prec = std::min(prec, m.min_prec());
  out.full_rank = ((int)out.pivots.size() == cols);
  return out;
}

// Membership of v in the column span, decided at the minimum precision of the
// reduced vector and the form.
inline bool lattice_contains(const TriangularForm& tf, std::vector<WittElem> v) {
  const Ctx& cx = tf.m.ctx;
  for (const auto& pv : tf.pivots) {
    const WittElem& entry = v[pv.row];
    int ev = cx->raw_val(entry.truncated().c);
    if (ev >= entry.prec) continue; // zero at its own precision
    if (ev < pv.val) return false;
    WittElem f = entry.divide_exact(pv.val);
    for (int i = 0; i < (int)v.size(); ++i) v[i] = v[i] - f * tf.m.at(i, pv.col);
  }
  int prec = tf.prec;
  for (const auto& e : v) prec = std::min(prec, e.prec);
  for (const auto& e : v)
    if (!e.is_zero(prec)) return false;
  return true;
}

inline bool lattice_contains(const Lattice& l, const std::vector<WittElem>& v) {
  return lattice_contains(triangularize(l.gens), v);
}

inline bool lattice_subset(const Lattice& a, const Lattice& b) {
  if (a.ambient_rank() != b.ambient_rank())
    throw usage_error("IncompatibleContexts", "lattices in different ambient modules");
  TriangularForm tb = triangularize(b.gens);
  for (int j = 0; j < a.gens.cols; ++j)
    if (!lattice_contains(tb, a.gens.col(j))) return false;
  return true;
}

// Colength = sum of pivot valuations; refuses when a pivot is invisible at
// the working precision.
inline int colength(const Lattice& l) {
  TriangularForm tf = triangularize(l.gens);
  if ((int)tf.pivots.size() != l.ambient_rank())
    throw solver_error("NotFullRankAtPrecision",
                       "lattice not full rank at precision " + std::to_string(tf.prec));
  int s = 0;
  for (const auto& pv : tf.pivots) s += pv.val;
  return s;
}

// det valuation of a square matrix via its pivot valuations
inline std::optional<int> det_valuation(const WittMatrix& m) {
  TriangularForm tf = triangularize(m);
  if ((int)tf.pivots.size() != m.cols) return std::nullopt;
  int s = 0;
  for (const auto& pv : tf.pivots) s += pv.val;
  return s;
}

// L(n) in the rank-2 elliptic module: <p^r e, p^r f> for n = 2r,
// <p^{r+1} e, p^r f> for n = 2r+1.
inline Lattice stable_sublattice_L(const Ctx& cx, int n) {
  if (n < 0 || n > 2 * (cx->N - 2))
    throw usage_error("RangeError", "colength not measurable at this precision");
  DieudonneModule d0 = make_elliptic_power(cx, 1);
  int r = n / 2;
  WittElem pr = WittElem::from_int(cx, 1);
  for (int i = 0; i < r; ++i) pr = pr * WittElem::from_int(cx, (detail::i64)cx->p);
  WittElem pe = (n % 2) ? pr * WittElem::from_int(cx, (detail::i64)cx->p) : pr;
  WittMatrix g(cx, 2, 2);
  g.at(0, 0) = pe;               // p^r or p^{r+1} times e
  g.at(1, 1) = pr;               // p^r times f
  return Lattice{d0, g};
}

struct AdmissibilityReport {
  bool admissible = false;
  std::string failed_clause; // "torsion-free" or "mod-p-image" when failing
};

// Fil is admissible iff D/Fil is torsion-free and the mod-p image of Fil is
// the kernel of F mod p.
inline AdmissibilityReport is_admissible(const DieudonneModule& d, const Lattice& fil) {
  AdmissibilityReport rep;
  if (fil.gens.cols != d.g) {
    rep.failed_clause = "rank";
    return rep;
  }
  ResidueMatrix img = reduce_mod_p(fil.gens);
  if (img.rank() != d.g) {
    rep.failed_clause = "torsion-free";
    return rep;
  }
  ResidueMatrix ker = kernel_of_frobenius_mod_p(d);
  if (!img.same_column_span(ker)) {
    rep.failed_clause = "mod-p-image";
    return rep;
  }
  rep.admissible = true;
  return rep;
}

// ---------------------------------------------------------------------------
// surface normalization
// ---------------------------------------------------------------------------

struct SurfaceNormalization {
  WittElem lambda;
  WittElem x_out;
  WittMatrix base_change;        // new basis in old coordinates
  DieudonneModule standard_form; // D(x_out) over the (possibly enlarged) ring
  WittMatrix f_in;               // the input Frobenius, embedded alongside
  int extension_degree_used = 0;
  int guarantee = 0;
};

// Input Frobenius block [[0,p,a,b],[1,0,c,d],[0,0,0,p],[0,0,1,0]]; the change
// of basis e2 += lambda*e1, f2 += a*e1 + (sigma(lambda)+c)*f1 with
// lambda - sigma^2(lambda) = sigma(c) + b/p turns it into the standard form
// with x = d + sigma(a).
inline SurfaceNormalization normalize_surface(const WittElem& a, const WittElem& b,
                                              const WittElem& c, const WittElem& d,
                                              AswOptions opts = {}) {
  a.check(b);
  a.check(c);
  a.check(d);
  auto bv = b.valuation();
  if (bv && *bv == 0) throw solver_error("BNotDivisible", "b must lie in pW");
  WittElem rhs = -(c.frobenius() + b.divide_exact(1));
  AswSolution lam = solve_asw(2, rhs, opts);
  Ctx big = lam.beta.ctx;
  WittElem A = embed(a, big), C = embed(c, big), D = embed(d, big);
  WittElem lambda = lam.beta;
  WittElem x_out = D + A.frobenius();

  WittMatrix M = WittMatrix::identity(big, 4);
  M.at(0, 2) = lambda;
  M.at(0, 3) = A;
  M.at(1, 3) = lambda.frobenius() + C;

  WittMatrix f_in(big, 4, 4);
  WittElem P = WittElem::from_int(big, (detail::i64)big->p);
  f_in.at(0, 1) = P;
  f_in.at(1, 0) = WittElem::one(big);
  f_in.at(0, 2) = embed(a, big);
  f_in.at(1, 2) = C;
  f_in.at(0, 3) = embed(b, big);
  f_in.at(1, 3) = D;
  f_in.at(2, 3) = P;
  f_in.at(3, 2) = WittElem::one(big);

  DieudonneModule std_form = make_standard_surface(x_out);
  SurfaceNormalization out{lambda, x_out, M, std_form, f_in, lam.extension_degree_used,
                           lam.guarantee};
  // the defining identity: F_in * sigma(M) = M * F_standard
  WittMatrix lhs = f_in * M.frobenius(1);
  WittMatrix rhsM = M * std_form.F;
  if (!lhs.eq(rhsM, lam.guarantee))
    throw internal_error("surface normalization identity failed");
  return out;
}

} // namespace wittlift
