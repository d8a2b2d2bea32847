#pragma once

// Lift certificates: a filtration on a standard-form Dieudonne module together
// with an isogeny onto a product of elliptic-curve modules, plus a clause-by-
// clause verification report.  Two constructions are provided: surfaces
// (isogenous to the square of one elliptic curve) and threefolds (isogenous to
// a product of three).
//
// Entry points reinterpret their inputs as exact coordinates and work at an
// internal precision N + PREC_MARGIN so that the divisions occurring in the
// derived elements cannot corrupt the reported digits; the certificate is then
// reduced to the report precision and verified there, so an independent
// verifier recomputes the identical report from the serialized data.

#include "wittlift/dieudonne.hpp"

#include <optional>

namespace wittlift {

constexpr int PREC_MARGIN = 8;

struct LiftOptions {
  AswOptions asw;
  int retries = 32;
  int report_precision = -1; // default: the input context's N
};

struct ClauseResult {
  std::string name;
  bool pass = false;
  int checked_mod = 0;
  std::string witness; // failure detail, empty on pass
};

struct VerificationReport {
  std::vector<ClauseResult> clauses;
  bool verified = false;
  std::optional<int> det_valuation;
  int min_checked_mod = 0;

  void add(ClauseResult c) { clauses.push_back(std::move(c)); }
  void finalize() {
    verified = true;
    min_checked_mod = 1 << 30;
    for (const auto& c : clauses) {
      verified = verified && c.pass;
      min_checked_mod = std::min(min_checked_mod, c.checked_mod);
    }
    if (clauses.empty()) min_checked_mod = 0;
  }
};

struct IsogenyMap {
  DieudonneModule source, target;
  WittMatrix M; // columns are images of the source basis in target coordinates
};

// The full contract of a filtered isogeny: equivariance for F and V, finite
// determinant valuation, admissibility of both filtrations, and the image
// condition phi(Fil) inside Fil'.
inline VerificationReport verify_isogeny(const IsogenyMap& phi, const Lattice& fil,
                                         const Lattice& fil_prime) {
  VerificationReport rep;
  const WittMatrix& M = phi.M;
  {
    WittMatrix lhs = M * phi.source.F;
    WittMatrix rhs = phi.target.F * M.frobenius(1);
    int g = std::min(lhs.min_prec(), rhs.min_prec());
    ClauseResult c{"F-equivariance", lhs.eq(rhs), g, ""};
    if (!c.pass) {
      for (int i = 0; i < lhs.rows && c.witness.empty(); ++i)
        for (int j = 0; j < lhs.cols; ++j)
          if (!lhs.at(i, j).eq(rhs.at(i, j))) {
            c.witness = "entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
            break;
          }
    }
    rep.add(std::move(c));
  }
  {
    WittMatrix lhs = M * phi.source.V;
    WittMatrix rhs = phi.target.V * M.frobenius(-1);
    int g = std::min(lhs.min_prec(), rhs.min_prec());
    ClauseResult c{"V-equivariance", lhs.eq(rhs), g, ""};
    if (!c.pass) {
      for (int i = 0; i < lhs.rows && c.witness.empty(); ++i)
        for (int j = 0; j < lhs.cols; ++j)
          if (!lhs.at(i, j).eq(rhs.at(i, j))) {
            c.witness = "entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
            break;
          }
    }
    rep.add(std::move(c));
  }
  {
    auto dv = det_valuation(M);
    rep.det_valuation = dv;
    ClauseResult c{"det-valuation-finite", dv.has_value(), M.min_prec(),
                   dv ? "" : "matrix not full rank at available precision"};
    rep.add(std::move(c));
  }
  {
    auto ar = is_admissible(phi.source, fil);
    rep.add({"fil-admissible", ar.admissible, 1, ar.failed_clause});
  }
  {
    auto ar = is_admissible(phi.target, fil_prime);
    rep.add({"fil-prime-admissible", ar.admissible, 1, ar.failed_clause});
  }
  {
    TriangularForm tf = triangularize(fil_prime.gens);
    bool ok = true;
    std::string witness;
    int g = std::min(tf.prec, M.min_prec());
    for (int j = 0; j < fil.gens.cols; ++j) {
      auto img = M.apply(fil.gens.col(j));
      for (const auto& e : img) g = std::min(g, e.prec);
      if (!lattice_contains(tf, img)) {
        ok = false;
        witness = "generator " + std::to_string(j);
        break;
      }
    }
    rep.add({"phi-maps-fil-into-fil-prime", ok, g, witness});
  }
  rep.finalize();
  return rep;
}

// --- small helpers -------------------------------------------------------

namespace detail_lift {

inline int working_precision(u64 p, int n_report) {
  int Nw = n_report + PREC_MARGIN;
  while (true) {
    u128 q = 1;
    bool ok = true;
    for (int i = 0; i < Nw; ++i) {
      q *= p;
      if (q >= ((u128)1 << 62)) { ok = false; break; }
    }
    if (ok) return Nw;
    --Nw;
  }
}

// input context, report precision and solver target resolved together: work
// happens at n_report + PREC_MARGIN (or the input's own precision when that is
// already at least as large), and the coset solvers only chase digits a small
// slack beyond the report precision
struct EntrySetup {
  Ctx cw;
  int n_report = 0;
};

inline EntrySetup entry_setup(const Ctx& base, LiftOptions& opts, int division_slack) {
  EntrySetup s;
  s.n_report = opts.report_precision > 0 ? std::min(opts.report_precision, base->N) : base->N;
  int Nw = working_precision(base->p, s.n_report);
  s.cw = base->N >= Nw ? base : base->at_precision(Nw);
  if (opts.asw.target_prec < 0)
    opts.asw.target_prec = std::min(s.n_report + division_slack, s.cw->N);
  return s;
}

// reinterpret coordinates as exact at the working precision
inline WittElem exact_lift(const WittElem& e, const Ctx& cw) {
  if ((int)e.c.size() != cw->deg) throw internal_error("exact_lift degree mismatch");
  std::vector<u64> v(e.c.size());
  for (size_t i = 0; i < e.c.size(); ++i) v[i] = e.c[i] % cw->q;
  return WittElem(cw, std::move(v), cw->N);
}

inline WittElem reduce_elem(const WittElem& e, const Ctx& cr) {
  if ((int)e.c.size() != cr->deg) throw internal_error("reduce_elem degree mismatch");
  std::vector<u64> v(e.c.size());
  for (size_t i = 0; i < e.c.size(); ++i) v[i] = e.c[i] % cr->q;
  return WittElem(cr, std::move(v), std::min(e.prec, cr->N));
}

inline WittMatrix reduce_matrix(const WittMatrix& m, const Ctx& cr) {
  WittMatrix out(cr, m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out.at(i, j) = reduce_elem(m.at(i, j), cr);
  return out;
}

inline ClauseResult check_val_eq(const std::string& name, const WittElem& e, int expected) {
  auto v = e.valuation();
  bool pass = v.has_value() && *v == expected && e.prec > expected;
  return {name, pass, e.prec,
          pass ? "" : ("valuation " + (v ? std::to_string(*v) : ">=" + std::to_string(e.prec)))};
}

inline ClauseResult check_in_pW(const std::string& name, const WittElem& e) {
  auto v = e.valuation();
  bool pass = e.prec >= 1 && (!v.has_value() || *v >= 1);
  return {name, pass, e.prec, pass ? "" : "unit"};
}

inline ClauseResult check_eq(const std::string& name, const WittElem& a, const WittElem& b) {
  int g = std::min(a.prec, b.prec);
  bool pass = a.eq(b);
  return {name, pass, g, pass ? "" : "mismatch"};
}

inline ClauseResult check_unit(const std::string& name, const WittElem& e) {
  return {name, e.is_unit(), e.prec, e.is_unit() ? "" : "not a unit"};
}

} // namespace detail_lift

// Searches the solution coset of an already-solved equation for a translate
// satisfying the unit conditions, inside the given ambient ring; skip_count
// admissible candidates are passed over (used by retry logic).
inline AswSolution impose_conditions(AswSolution sol, int k,
                                     const std::vector<UnitCondition>& conditions,
                                     const Ctx& ambient, int skip_count = 0) {
  sol.beta = embed(sol.beta, ambient);
  sol.extension_degree_used = std::max(sol.extension_degree_used, ambient->deg);
  auto admissible = [&](const WittElem& cand) {
    for (const auto& cond : conditions)
      if (!cond(cand).is_unit()) return false;
    return true;
  };
  std::vector<WittElem> ts = kernel_translates(ambient, k);
  int seen = 0;
  for (const WittElem& t : ts) {
    WittElem cand = sol.beta + t;
    if (admissible(cand)) {
      if (seen++ == skip_count) {
        sol.beta = cand;
        return sol;
      }
    }
  }
  for (const WittElem& t1 : ts) {
    for (const WittElem& t2 : ts) {
      WittElem cand =
          sol.beta + t1 + WittElem::from_int(ambient, (detail::i64)ambient->p) * t2;
      if (admissible(cand)) {
        if (seen++ == skip_count) {
          sol.beta = cand;
          return sol;
        }
      }
    }
  }
  throw solver_error("NoAdmissibleTranslate",
                     "no kernel translate satisfies all unit conditions");
}

// ---------------------------------------------------------------------------
// surfaces
// ---------------------------------------------------------------------------

struct SurfaceLiftCertificate {
  WittElem x;                      // standard-form parameter (report precision)
  WittElem beta, zeta, u, b;       // derived elements
  DieudonneModule D, Dprime;
  Lattice fil, fil_prime;
  IsogenyMap phi;
  VerificationReport report;
  std::vector<ClauseResult> identities;
  int extension_degree = 0;
  int guarantee = 0; // precision the defining equation of beta is certified at
};

// Identity checks recomputable from the serialized data alone; shared between
// the producer and the independent verifier.
inline std::vector<ClauseResult> surface_identity_checks(const SurfaceLiftCertificate& cert) {
  using namespace detail_lift;
  std::vector<ClauseResult> out;
  const Ctx& cr = cert.x.ctx;
  WittElem Pr = WittElem::from_int(cr, (detail::i64)cr->p);
  out.push_back(check_eq("asw-equation-beta", cert.beta.frobenius_pow(2) - cert.beta, cert.x));
  out.push_back(check_unit("beta-unit", cert.beta));
  out.push_back(check_unit("u-unit", cert.u));
  out.push_back(check_eq("u-definition", cert.u, cert.zeta.frobenius() - cert.zeta));
  {
    u64 ord = cr->p * cr->p - 1;
    WittElem zpow(cr, cr->raw_pow(cert.zeta.c, ord), cert.zeta.prec);
    out.push_back(check_eq("zeta-root-of-unity", zpow, WittElem::one(cr)));
  }
  {
    WittElem resid =
        Pr * cert.beta * cert.b * cert.b + cert.u * cert.b - cert.beta.frobenius_inv();
    out.push_back({"hensel-quadratic-residual-zero", resid.is_zero(), resid.prec, ""});
  }
  out.push_back({"det-valuation-expected-2",
                 cert.report.det_valuation.has_value() && *cert.report.det_valuation == 2,
                 cert.phi.M.min_prec(), "derived assertion"});
  return out;
}

inline SurfaceLiftCertificate surface_lift(const WittElem& x_in, LiftOptions opts = {}) {
  using namespace detail_lift;
  Ctx base = x_in.ctx;
  EntrySetup es = entry_setup(base, opts, 2);
  Ctx cw = es.cw;
  int n_report = es.n_report;
  WittElem x = cw.get() == base.get() ? x_in : exact_lift(x_in, cw);
  if (cw->deg % 2) { // a primitive (p^2-1)-th root of unity needs even degree
    Ctx c2 = WittContext::make(cw->p, 2 * cw->deg, cw->N);
    x = embed(x, c2);
    cw = c2;
  }
  // two residue-field extensions by default: certified digits beyond that cost
  // a factor of p in degree each
  if (opts.asw.max_degree <= 0) opts.asw.max_degree = cw->deg * (int)(cw->p * cw->p);

  AswSolution bs = solve_asw(2, x, opts.asw);
  bs = impose_conditions(bs, 2, {[](const WittElem& b) { return b; }}, bs.beta.ctx);
  Ctx cj = bs.beta.ctx;
  WittElem xw = embed(x, cj);
  WittElem beta = bs.beta;

  Ctx c2 = WittContext::make(cw->p, 2, cw->N);
  WittElem zeta = embed(c2->zeta(), cj);
  WittElem u = zeta.frobenius() - zeta;
  if (!u.is_unit()) throw internal_error("sigma(zeta) - zeta is not a unit");

  WittElem P = WittElem::from_int(cj, (detail::i64)cj->p);
  std::vector<WittElem> quad = {-beta.frobenius_inv(), u, P * beta};
  ResidueElem seed = beta.frobenius_inv().reduce_mod_p() * u.reduce_mod_p().inv();
  WittElem b = hensel_root(quad, seed);

  // reduce to the report precision and assemble there
  Ctx cr = cj->at_precision(n_report);
  WittElem xr = reduce_elem(xw, cr), br = reduce_elem(beta, cr), zr = reduce_elem(zeta, cr),
           ur = reduce_elem(u, cr), hr = reduce_elem(b, cr);
  WittElem Pr = WittElem::from_int(cr, (detail::i64)cr->p);

  SurfaceLiftCertificate cert;
  cert.x = xr;
  cert.beta = br;
  cert.zeta = zr;
  cert.u = ur;
  cert.b = hr;
  cert.extension_degree = bs.extension_degree_used;
  cert.guarantee = std::min(bs.guarantee, n_report);
  cert.D = make_standard_surface(xr);
  cert.Dprime = make_elliptic_power(cr, 2);

  WittMatrix fil(cr, 4, 2);
  fil.at(0, 0) = Pr * hr;
  fil.at(1, 0) = WittElem::one(cr);
  fil.at(0, 1) = -xr.frobenius_inv();
  fil.at(2, 1) = Pr * hr;
  fil.at(3, 1) = WittElem::one(cr);
  WittMatrix filp(cr, 4, 2);
  filp.at(0, 0) = Pr * hr;
  filp.at(1, 0) = WittElem::one(cr);
  filp.at(2, 1) = Pr * hr;
  filp.at(3, 1) = WittElem::one(cr);
  cert.fil = Lattice{cert.D, fil};
  cert.fil_prime = Lattice{cert.Dprime, filp};

  WittMatrix M(cr, 4, 4);
  M.at(0, 0) = Pr;
  M.at(1, 1) = Pr;
  M.at(0, 2) = zr;
  M.at(1, 2) = br;
  M.at(2, 2) = WittElem::one(cr);
  M.at(0, 3) = Pr * br.frobenius();
  M.at(1, 3) = zr.frobenius();
  M.at(3, 3) = WittElem::one(cr);
  cert.phi = IsogenyMap{cert.D, cert.Dprime, M};

  cert.report = verify_isogeny(cert.phi, cert.fil, cert.fil_prime);
  cert.identities = surface_identity_checks(cert);

  if (!cert.report.verified) {
    std::string bad;
    bool content_failure = false;
    for (const auto& c : cert.report.clauses)
      if (!c.pass) {
        bad += c.name + " ";
        content_failure = content_failure || c.name != "det-valuation-finite";
      }
    if (!content_failure)
      throw solver_error("PrecisionExhausted",
                         "certified digits cannot pin the determinant valuation; "
                         "raise the residue degree cap (max_degree)");
    throw verification_error("VerificationFailed", "surface certificate clause(s): " + bad);
  }
  return cert;
}

// ---------------------------------------------------------------------------
// threefolds
// ---------------------------------------------------------------------------

struct ThreefoldAux {
  WittElem lambda1, mu1, nu1, delta1, delta2, nu2, Phi, psi, theta;
};

struct ThreefoldParameters {
  WittElem x, y, z; // embedded into the join context
  WittElem beta_prime, Q, R, T, S;
  ThreefoldAux aux;
  int extension_degree = 0;
  int guarantee = 0;
};

struct ThreefoldLiftCertificate {
  WittElem x, y, z;
  WittElem beta_prime, Q, R, T, S;
  ThreefoldAux aux;
  WittElem c, i, a, b_prime;
  DieudonneModule D, Dprime;
  Lattice fil, fil_prime;
  IsogenyMap phi;
  VerificationReport report;
  std::vector<ClauseResult> identities;
  int extension_degree = 0;
  int guarantee = 0;
  int retries_used = 0;
};

inline std::vector<ClauseResult> threefold_identity_checks(const ThreefoldLiftCertificate& cert) {
  using namespace detail_lift;
  std::vector<ClauseResult> out;
  const Ctx& cr = cert.x.ctx;
  WittElem Pr = WittElem::from_int(cr, (detail::i64)cr->p);
  WittElem one = WittElem::one(cr);
  const ThreefoldAux& ax = cert.aux;

  out.push_back(check_eq("asw-equation-beta-prime",
                         cert.beta_prime.frobenius_pow(2) - cert.beta_prime, cert.x));
  out.push_back(check_eq("asw-equation-Q", cert.Q.frobenius_pow(2) - cert.Q,
                         Pr * cert.y * cert.beta_prime.frobenius()));
  out.push_back(check_eq("asw-equation-R", cert.R.frobenius_pow(2) - cert.R,
                         cert.y + Pr * cert.z));
  out.push_back(check_eq("asw-equation-T", cert.T.frobenius_pow(2) - cert.T, cert.y));
  out.push_back(check_eq("S-definition", cert.S, one + Pr * cert.T));
  {
    bool ok = true;
    int g = cr->N;
    auto probe = [&](const WittElem& have, const WittElem& want) {
      g = std::min(g, std::min(have.prec, want.prec));
      ok = ok && have.eq(want);
    };
    probe(ax.lambda1, Pr * cert.R * cert.beta_prime.frobenius_inv() - cert.Q);
    probe(ax.mu1, cert.Q.frobenius_inv() - Pr * cert.beta_prime * cert.R.frobenius_inv());
    probe(ax.nu1, Pr * (cert.R - cert.beta_prime * cert.Q));
    probe(ax.delta1,
          cert.R.frobenius_inv() - cert.Q.frobenius_inv() * cert.beta_prime.frobenius_inv());
    probe(ax.delta2, cert.T.frobenius_inv() - cert.S.frobenius_inv());
    probe(ax.nu2, Pr * (cert.T - cert.S));
    probe(ax.Phi, ax.delta1 * ax.nu2 - ax.delta2 * ax.nu1);
    probe(ax.psi, ax.mu1 * ax.nu2 - ax.nu1);
    probe(ax.theta, ax.lambda1 * ax.nu2 + ax.nu1);
    out.push_back({"aux-definitions", ok, g, ""});
  }
  out.push_back(check_val_eq("ord-psi-equals-1", ax.psi, 1));
  out.push_back(check_val_eq("ord-nu1-equals-1", ax.nu1, 1));
  out.push_back(check_val_eq("ord-theta-equals-1", ax.theta, 1));
  out.push_back(check_val_eq("ord-nu2-equals-1", ax.nu2, 1));
  out.push_back(
      check_val_eq("ord-combo-equals-1", -(ax.lambda1 * ax.psi) + ax.mu1 * ax.theta, 1));
  out.push_back(check_in_pW("Phi-in-pW", ax.Phi));
  {
    WittElem resid =
        cert.c * cert.c * (-(ax.nu1 * ax.psi)) +
        cert.c * (-(ax.lambda1 * ax.psi) + ax.mu1 * ax.theta + ax.nu1 * ax.Phi) +
        (ax.lambda1 * ax.Phi - ax.delta1 * ax.theta);
    out.push_back({"quadratic-residual-zero", resid.is_zero(), resid.prec, ""});
  }
  out.push_back(check_eq("i-integral", ax.Phi - ax.psi * cert.c, ax.theta * cert.i));
  out.push_back(check_unit("a-denominator-unit",
                           cert.Q.frobenius_inv() + Pr * cert.i * cert.R));
  out.push_back(check_unit("b-prime-denominator-unit",
                           cert.S.frobenius_inv() + Pr * cert.i * cert.T));
  out.push_back(check_eq("a-definition", cert.a * (cert.Q.frobenius_inv() + Pr * cert.i * cert.R),
                         cert.R.frobenius_inv() + cert.i * cert.Q));
  out.push_back(check_eq("b-prime-definition",
                         cert.b_prime * (cert.S.frobenius_inv() + Pr * cert.i * cert.T),
                         cert.T.frobenius_inv() + cert.i * cert.S));
  out.push_back(check_eq("a-closed-form", cert.a * (one + Pr * cert.c * cert.beta_prime),
                         cert.beta_prime.frobenius_inv() + cert.c));
  out.push_back(check_eq("b-prime-closed-form", cert.b_prime * (one + Pr * cert.c),
                         one + cert.c));
  out.push_back({"det-valuation-expected-6",
                 cert.report.det_valuation.has_value() && *cert.report.det_valuation == 6,
                 cert.phi.M.min_prec(), "derived assertion"});
  out.push_back(check_unit("hypothesis-x-unit", cert.x));
  out.push_back(check_unit("hypothesis-y-unit", cert.y));
  return out;
}

// The four coset choices with their unit side-conditions, then the auxiliary
// elements defined by the fixed formulas.
inline ThreefoldParameters derive_threefold_parameters(const WittElem& x, const WittElem& y,
                                                       const WittElem& z, LiftOptions opts = {},
                                                       int skip_q = 0, int skip_r = 0,
                                                       int skip_t = 0) {
  x.check(y);
  x.check(z);
  Ctx cw = x.ctx;
  WittElem Pw = WittElem::from_int(cw, (detail::i64)cw->p);
  // each coset solve may extend at most twice beyond where it starts, within
  // the absolute cap; otherwise an early equation can consume the entire
  // degree budget that the later ones need
  auto per_solve = [&](int start_deg) {
    AswOptions a = opts.asw;
    long rel = (long)start_deg * (long)(cw->p * cw->p);
    long cap = a.max_degree > 0 ? a.max_degree : ASW_DEFAULT_MAX_DEGREE;
    a.max_degree = (int)std::min(cap, rel);
    return a;
  };

  AswSolution bsol = solve_asw(2, x, per_solve(cw->deg));
  bsol = impose_conditions(bsol, 2, {[](const WittElem& b) { return b; }}, bsol.beta.ctx);

  Ctx c1 = bsol.beta.ctx;
  WittElem y1 = embed(y, c1);
  WittElem rhsQ = embed(Pw, c1) * y1 * bsol.beta.frobenius();
  AswSolution qsol = solve_asw(2, rhsQ, per_solve(c1->deg));
  Ctx cj = qsol.beta.ctx;
  qsol = impose_conditions(
      qsol, 2,
      {[](const WittElem& q) { return q; },
       [](const WittElem& q) { return WittElem::one(q.ctx) - q; },
       [](const WittElem& q) { return q - q.frobenius(); }},
      cj, skip_q);

  WittElem beta_prime = embed(bsol.beta, cj);
  WittElem Q = qsol.beta;
  WittElem xj = embed(x, cj), yj = embed(y, cj), zj = embed(z, cj);
  WittElem P = WittElem::from_int(cj, (detail::i64)cj->p);

  AswSolution rsol = solve_asw(2, y + Pw * z, per_solve(cw->deg));
  rsol = impose_conditions(rsol, 2,
                           {[](const WittElem& r) { return r; },
                            [&](const WittElem& r) { return r - beta_prime * Q; }},
                           cj, skip_r);
  WittElem R = rsol.beta;

  AswSolution tsol = solve_asw(2, y, per_solve(cw->deg));
  tsol = impose_conditions(
      tsol, 2,
      {[](const WittElem& t) { return t; },
       [&](const WittElem& t) { return t - beta_prime * Q; },
       [&](const WittElem& t) {
         return -(Q * (t - WittElem::one(t.ctx))) + R - beta_prime * Q;
       },
       [&](const WittElem& t) {
         return Q.frobenius_inv() * (t - WittElem::one(t.ctx)) - (R - beta_prime * Q);
       }},
      cj, skip_t);
  WittElem T = tsol.beta;

  ThreefoldParameters out;
  out.x = xj;
  out.y = yj;
  out.z = zj;
  out.beta_prime = beta_prime;
  out.Q = Q;
  out.R = R;
  out.T = T;
  out.S = WittElem::one(cj) + P * T;
  out.extension_degree = cj->deg;
  out.guarantee =
      std::min(std::min(bsol.guarantee, qsol.guarantee), std::min(rsol.guarantee, tsol.guarantee));

  ThreefoldAux& ax = out.aux;
  const WittElem &S = out.S;
  ax.lambda1 = P * R * beta_prime.frobenius_inv() - Q;
  ax.mu1 = Q.frobenius_inv() - P * beta_prime * R.frobenius_inv();
  ax.nu1 = P * (R - beta_prime * Q);
  ax.delta1 = R.frobenius_inv() - Q.frobenius_inv() * beta_prime.frobenius_inv();
  ax.delta2 = T.frobenius_inv() - S.frobenius_inv();
  ax.nu2 = P * (T - S);
  ax.Phi = ax.delta1 * ax.nu2 - ax.delta2 * ax.nu1;
  ax.psi = ax.mu1 * ax.nu2 - ax.nu1;
  ax.theta = ax.lambda1 * ax.nu2 + ax.nu1;
  return out;
}

inline ThreefoldLiftCertificate threefold_lift(const WittElem& x_in, const WittElem& y_in,
                                               const WittElem& z_in, LiftOptions opts = {}) {
  using namespace detail_lift;
  x_in.check(y_in);
  x_in.check(z_in);
  Ctx base = x_in.ctx;
  EntrySetup es = entry_setup(base, opts, 4);
  Ctx cw = es.cw;
  int n_report = es.n_report;
  bool same = cw.get() == base.get();
  WittElem x = same ? x_in : exact_lift(x_in, cw);
  WittElem y = same ? y_in : exact_lift(y_in, cw);
  WittElem z = same ? z_in : exact_lift(z_in, cw);
  if (cw->deg % 2) {
    Ctx c2 = WittContext::make(cw->p, 2 * cw->deg, cw->N);
    x = embed(x, c2);
    y = embed(y, c2);
    z = embed(z, c2);
    cw = c2;
  }
  if (opts.asw.max_degree <= 0) {
    // absolute ceiling: room for two extensions past wherever the last coset
    // equation starts, bounded so tower construction stays interactive
    long cap = (long)cw->deg * (long)(cw->p * cw->p) * (long)(cw->p * cw->p);
    opts.asw.max_degree = (int)std::min(cap, (long)ASW_DEFAULT_MAX_DEGREE);
  }

  int attempt = 0;
  std::string last_error;
  for (; attempt < std::max(1, opts.retries); ++attempt) {
    int skip_t = attempt % 4;
    int skip_q = (attempt / 4) % 4;
    int skip_r = attempt / 16;
    ThreefoldParameters par;
    try {
      par = derive_threefold_parameters(x, y, z, opts, skip_q, skip_r, skip_t);
    } catch (const WittError& e) {
      if (e.code == "NoAdmissibleTranslate") { last_error = e.what(); continue; }
      throw;
    }
    Ctx cj = par.beta_prime.ctx;
    WittElem P = WittElem::from_int(cj, (detail::i64)cj->p);
    const ThreefoldAux& ax = par.aux;

    WittElem c, i, a, bp;
    try {
      std::vector<WittElem> quad = {ax.lambda1 * ax.Phi - ax.delta1 * ax.theta,
                                    -(ax.lambda1 * ax.psi) + ax.mu1 * ax.theta + ax.nu1 * ax.Phi,
                                    -(ax.nu1 * ax.psi)};
      // seed from the normalized reduction (all coefficients divisible by p)
      WittElem lin = quad[1].divide_exact(1);
      WittElem cst = quad[0].divide_exact(1);
      if (!lin.is_unit()) throw solver_error("SeedNotSimple", "normalized linear coefficient not a unit");
      ResidueElem seed =
          ResidueElem::zero(cj) - (cst.reduce_mod_p() * lin.reduce_mod_p().inv());
      c = hensel_root(quad, seed);

      WittElem num = ax.Phi - ax.psi * c;
      auto nv = num.valuation();
      if (nv && *nv < 1) throw solver_error("NotDivisible", "Phi - psi*c not divisible by theta");
      i = num.divide_exact(1) * ax.theta.divide_exact(1).inv();
      a = (par.R.frobenius_inv() + i * par.Q) * (par.Q.frobenius_inv() + P * i * par.R).inv();
      bp = (par.T.frobenius_inv() + i * par.S) * (par.S.frobenius_inv() + P * i * par.T).inv();
    } catch (const WittError& e) {
      if (e.kind == ErrorKind::Solver) { last_error = e.what(); continue; }
      throw;
    }

    // reduce and assemble
    Ctx cr = cj->at_precision(n_report);
    auto rd = [&](const WittElem& e) { return reduce_elem(e, cr); };
    ThreefoldLiftCertificate cert;
    cert.x = rd(par.x);
    cert.y = rd(par.y);
    cert.z = rd(par.z);
    cert.beta_prime = rd(par.beta_prime);
    cert.Q = rd(par.Q);
    cert.R = rd(par.R);
    cert.T = rd(par.T);
    cert.S = rd(par.S);
    cert.aux = {rd(ax.lambda1), rd(ax.mu1),  rd(ax.nu1), rd(ax.delta1), rd(ax.delta2),
                rd(ax.nu2),     rd(ax.Phi), rd(ax.psi), rd(ax.theta)};
    cert.c = rd(c);
    cert.i = rd(i);
    cert.a = rd(a);
    cert.b_prime = rd(bp);
    cert.extension_degree = par.extension_degree;
    cert.guarantee = std::min(par.guarantee, n_report);
    cert.retries_used = attempt;

    cert.D = make_standard_threefold(cert.x, cert.y, cert.z);
    cert.Dprime = make_elliptic_power(cr, 3);
    WittElem Pr = WittElem::from_int(cr, (detail::i64)cr->p);
    WittElem one = WittElem::one(cr);

    // third generator carries -sigma^{-1}(z) e1 so its reduction lies in
    // ker(F mod p); without it the membership identities for a and b' do not
    // close and the mod-p image misses the kernel whenever z is a unit
    WittMatrix fil(cr, 6, 3);
    fil.at(0, 0) = Pr * cert.a;
    fil.at(1, 0) = one;
    fil.at(0, 1) = -cert.x.frobenius_inv();
    fil.at(2, 1) = Pr * cert.c;
    fil.at(3, 1) = one;
    fil.at(0, 2) = -cert.z.frobenius_inv();
    fil.at(2, 2) = -cert.y.frobenius_inv();
    fil.at(4, 2) = Pr * cert.i;
    fil.at(5, 2) = one;
    WittMatrix filp(cr, 6, 3);
    filp.at(0, 0) = Pr * cert.a;
    filp.at(1, 0) = one;
    filp.at(2, 1) = Pr * cert.b_prime;
    filp.at(3, 1) = one;
    filp.at(4, 2) = Pr * cert.i;
    filp.at(5, 2) = one;
    cert.fil = Lattice{cert.D, fil};
    cert.fil_prime = Lattice{cert.Dprime, filp};

    WittMatrix M(cr, 6, 6);
    M.at(0, 0) = Pr * Pr;
    M.at(1, 1) = Pr * Pr;
    M.at(0, 2) = Pr;
    M.at(1, 2) = Pr * cert.beta_prime;
    M.at(2, 2) = Pr;
    M.at(3, 2) = Pr;
    M.at(0, 3) = Pr * Pr * cert.beta_prime.frobenius();
    M.at(1, 3) = Pr;
    M.at(2, 3) = Pr * Pr;
    M.at(3, 3) = Pr;
    M.at(0, 4) = cert.Q;
    M.at(1, 4) = cert.R;
    M.at(2, 4) = cert.S;
    M.at(3, 4) = cert.T;
    M.at(4, 4) = one;
    M.at(0, 5) = Pr * cert.R.frobenius();
    M.at(1, 5) = cert.Q.frobenius();
    M.at(2, 5) = Pr * cert.T.frobenius();
    M.at(3, 5) = cert.S.frobenius();
    M.at(5, 5) = one;
    cert.phi = IsogenyMap{cert.D, cert.Dprime, M};

    cert.report = verify_isogeny(cert.phi, cert.fil, cert.fil_prime);
    cert.identities = threefold_identity_checks(cert);

    if (!cert.report.verified) {
      std::string bad;
      bool content_failure = false;
      for (const auto& cl : cert.report.clauses)
        if (!cl.pass) {
          bad += cl.name + " ";
          content_failure = content_failure || cl.name != "det-valuation-finite";
        }
      if (!content_failure)
        throw solver_error("PrecisionExhausted",
                           "certified digits cannot pin the determinant valuation; "
                           "raise the residue degree cap (max_degree)");
      throw verification_error("VerificationFailed",
                               "threefold certificate clause(s): " + bad);
    }
    return cert;
  }
  throw solver_error("NoAdmissibleTranslate",
                     "threefold construction failed after " + std::to_string(attempt) +
                         " retries: " + last_error);
}

} // namespace wittlift
