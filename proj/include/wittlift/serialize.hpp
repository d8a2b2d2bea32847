#pragma once

// JSON serialization for ring elements, matrices, lattices, certificates and
// reports.  All numbers are rendered as decimal strings and key order is
// fixed, so identical inputs serialize byte-identically.

#include "wittlift/constructions.hpp"
#include "wittlift/obstruction.hpp"

#include <json.hpp>

namespace wittlift {

using json = nlohmann::ordered_json;

inline json context_header(const Ctx& cx) {
  json j;
  j["p"] = std::to_string(cx->p);
  j["n"] = cx->deg;
  j["N"] = cx->N;
  json g = json::array();
  for (u64 v : cx->gpoly) g.push_back(std::to_string(v));
  j["gpoly"] = g;
  return j;
}

inline Ctx parse_context(const json& j) {
  u64 p = std::stoull(j.at("p").get<std::string>());
  int n = j.at("n").get<int>();
  int N = j.at("N").get<int>();
  std::vector<u64> g;
  for (const auto& v : j.at("gpoly")) g.push_back(std::stoull(v.get<std::string>()));
  // prefer the canonical registry context when the modulus matches
  try {
    Ctx cx = WittContext::make(p, n, N);
    if (cx->gpoly == g) return cx;
  } catch (const WittError&) {
  }
  return WittContext::from_gpoly(p, N, g);
}

inline json elem_to_json(const WittElem& e) {
  json j;
  json c = json::array();
  WittElem t = e.truncated();
  for (u64 v : t.c) c.push_back(std::to_string(v));
  j["coeffs"] = c;
  j["prec"] = e.prec;
  return j;
}

inline WittElem elem_from_json(const json& j, const Ctx& cx) {
  std::vector<u64> c;
  for (const auto& v : j.at("coeffs")) c.push_back(std::stoull(v.get<std::string>()) % cx->q);
  if ((int)c.size() != cx->deg)
    throw usage_error("BadElement", "coefficient count does not match the context degree");
  int prec = j.contains("prec") ? j.at("prec").get<int>() : cx->N;
  return WittElem(cx, std::move(c), std::min(prec, cx->N));
}

// standalone element (carries its own context triple)
inline json elem_to_json_standalone(const WittElem& e) {
  json j;
  j["p"] = std::to_string(e.ctx->p);
  j["n"] = e.ctx->deg;
  j["N"] = e.ctx->N;
  WittElem t = e.truncated();
  json c = json::array();
  for (u64 v : t.c) c.push_back(std::to_string(v));
  j["coeffs"] = c;
  j["prec"] = e.prec;
  return j;
}

inline json matrix_to_json(const WittMatrix& m) {
  json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  json entries = json::array();
  for (const auto& e : m.a) entries.push_back(elem_to_json(e));
  j["entries"] = entries;
  return j;
}

inline WittMatrix matrix_from_json(const json& j, const Ctx& cx) {
  WittMatrix m(cx, j.at("rows").get<int>(), j.at("cols").get<int>());
  const auto& entries = j.at("entries");
  if ((int)entries.size() != m.rows * m.cols)
    throw usage_error("BadMatrix", "entry count mismatch");
  for (size_t i = 0; i < entries.size(); ++i) m.a[i] = elem_from_json(entries[i], cx);
  return m;
}

inline json clause_to_json(const ClauseResult& c) {
  json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["checked_mod"] = c.checked_mod;
  if (!c.witness.empty()) j["witness"] = c.witness;
  return j;
}

inline json report_to_json(const VerificationReport& r) {
  json j;
  j["verified"] = r.verified;
  if (r.det_valuation)
    j["det_valuation"] = *r.det_valuation;
  else
    j["det_valuation"] = nullptr;
  j["min_checked_mod"] = r.min_checked_mod;
  json cl = json::array();
  for (const auto& c : r.clauses) cl.push_back(clause_to_json(c));
  j["clauses"] = cl;
  return j;
}

inline json identities_to_json(const std::vector<ClauseResult>& ids) {
  json a = json::array();
  for (const auto& c : ids) a.push_back(clause_to_json(c));
  return a;
}

inline json surface_to_json(const SurfaceLiftCertificate& c) {
  json j;
  j["kind"] = "surface-lift";
  j["context"] = context_header(c.x.ctx);
  j["x"] = elem_to_json(c.x);
  json d;
  d["beta"] = elem_to_json(c.beta);
  d["zeta"] = elem_to_json(c.zeta);
  d["u"] = elem_to_json(c.u);
  d["b"] = elem_to_json(c.b);
  j["derived"] = d;
  json s;
  s["extension_degree"] = c.extension_degree;
  s["guarantee"] = c.guarantee;
  j["solver"] = s;
  j["fil"] = matrix_to_json(c.fil.gens);
  j["fil_prime"] = matrix_to_json(c.fil_prime.gens);
  j["phi"] = matrix_to_json(c.phi.M);
  j["identities"] = identities_to_json(c.identities);
  j["report"] = report_to_json(c.report);
  return j;
}

inline SurfaceLiftCertificate surface_from_json(const json& j) {
  Ctx cx = parse_context(j.at("context"));
  SurfaceLiftCertificate c;
  c.x = elem_from_json(j.at("x"), cx);
  c.beta = elem_from_json(j.at("derived").at("beta"), cx);
  c.zeta = elem_from_json(j.at("derived").at("zeta"), cx);
  c.u = elem_from_json(j.at("derived").at("u"), cx);
  c.b = elem_from_json(j.at("derived").at("b"), cx);
  c.extension_degree = j.at("solver").at("extension_degree").get<int>();
  c.guarantee = j.at("solver").at("guarantee").get<int>();
  c.D = make_standard_surface(c.x);
  c.Dprime = make_elliptic_power(cx, 2);
  c.fil = Lattice{c.D, matrix_from_json(j.at("fil"), cx)};
  c.fil_prime = Lattice{c.Dprime, matrix_from_json(j.at("fil_prime"), cx)};
  c.phi = IsogenyMap{c.D, c.Dprime, matrix_from_json(j.at("phi"), cx)};
  return c;
}

inline json threefold_to_json(const ThreefoldLiftCertificate& c) {
  json j;
  j["kind"] = "threefold-lift";
  j["context"] = context_header(c.x.ctx);
  json par;
  par["x"] = elem_to_json(c.x);
  par["y"] = elem_to_json(c.y);
  par["z"] = elem_to_json(c.z);
  j["params"] = par;
  json d;
  d["beta_prime"] = elem_to_json(c.beta_prime);
  d["Q"] = elem_to_json(c.Q);
  d["R"] = elem_to_json(c.R);
  d["T"] = elem_to_json(c.T);
  d["S"] = elem_to_json(c.S);
  d["lambda1"] = elem_to_json(c.aux.lambda1);
  d["mu1"] = elem_to_json(c.aux.mu1);
  d["nu1"] = elem_to_json(c.aux.nu1);
  d["delta1"] = elem_to_json(c.aux.delta1);
  d["delta2"] = elem_to_json(c.aux.delta2);
  d["nu2"] = elem_to_json(c.aux.nu2);
  d["Phi"] = elem_to_json(c.aux.Phi);
  d["psi"] = elem_to_json(c.aux.psi);
  d["theta"] = elem_to_json(c.aux.theta);
  d["c"] = elem_to_json(c.c);
  d["i"] = elem_to_json(c.i);
  d["a"] = elem_to_json(c.a);
  d["b_prime"] = elem_to_json(c.b_prime);
  j["derived"] = d;
  json s;
  s["extension_degree"] = c.extension_degree;
  s["guarantee"] = c.guarantee;
  s["retries_used"] = c.retries_used;
  j["solver"] = s;
  j["fil"] = matrix_to_json(c.fil.gens);
  j["fil_prime"] = matrix_to_json(c.fil_prime.gens);
  j["phi"] = matrix_to_json(c.phi.M);
  j["identities"] = identities_to_json(c.identities);
  j["report"] = report_to_json(c.report);
  return j;
}

inline ThreefoldLiftCertificate threefold_from_json(const json& j) {
  Ctx cx = parse_context(j.at("context"));
  ThreefoldLiftCertificate c;
  const auto& par = j.at("params");
  c.x = elem_from_json(par.at("x"), cx);
  c.y = elem_from_json(par.at("y"), cx);
  c.z = elem_from_json(par.at("z"), cx);
  const auto& d = j.at("derived");
  c.beta_prime = elem_from_json(d.at("beta_prime"), cx);
  c.Q = elem_from_json(d.at("Q"), cx);
  c.R = elem_from_json(d.at("R"), cx);
  c.T = elem_from_json(d.at("T"), cx);
  c.S = elem_from_json(d.at("S"), cx);
  c.aux.lambda1 = elem_from_json(d.at("lambda1"), cx);
  c.aux.mu1 = elem_from_json(d.at("mu1"), cx);
  c.aux.nu1 = elem_from_json(d.at("nu1"), cx);
  c.aux.delta1 = elem_from_json(d.at("delta1"), cx);
  c.aux.delta2 = elem_from_json(d.at("delta2"), cx);
  c.aux.nu2 = elem_from_json(d.at("nu2"), cx);
  c.aux.Phi = elem_from_json(d.at("Phi"), cx);
  c.aux.psi = elem_from_json(d.at("psi"), cx);
  c.aux.theta = elem_from_json(d.at("theta"), cx);
  c.c = elem_from_json(d.at("c"), cx);
  c.i = elem_from_json(d.at("i"), cx);
  c.a = elem_from_json(d.at("a"), cx);
  c.b_prime = elem_from_json(d.at("b_prime"), cx);
  c.extension_degree = j.at("solver").at("extension_degree").get<int>();
  c.guarantee = j.at("solver").at("guarantee").get<int>();
  c.retries_used = j.at("solver").at("retries_used").get<int>();
  c.D = make_standard_threefold(c.x, c.y, c.z);
  c.Dprime = make_elliptic_power(cx, 3);
  c.fil = Lattice{c.D, matrix_from_json(j.at("fil"), cx)};
  c.fil_prime = Lattice{c.Dprime, matrix_from_json(j.at("fil_prime"), cx)};
  c.phi = IsogenyMap{c.D, c.Dprime, matrix_from_json(j.at("phi"), cx)};
  return c;
}

inline json witness_to_json(const IsoWitness& w) {
  json j;
  j["kind"] = "iso-witness";
  j["context"] = context_header(w.x.ctx);
  json par, parp;
  par["x"] = elem_to_json(w.x);
  par["y"] = elem_to_json(w.y);
  par["z"] = elem_to_json(w.z);
  parp["x"] = elem_to_json(w.xp);
  parp["y"] = elem_to_json(w.yp);
  parp["z"] = elem_to_json(w.zp);
  j["params"] = par;
  j["params_prime"] = parp;
  j["M"] = matrix_to_json(w.M);
  return j;
}

inline IsoWitness witness_from_json(const json& j) {
  Ctx cx = parse_context(j.at("context"));
  IsoWitness w;
  w.x = elem_from_json(j.at("params").at("x"), cx);
  w.y = elem_from_json(j.at("params").at("y"), cx);
  w.z = elem_from_json(j.at("params").at("z"), cx);
  w.xp = elem_from_json(j.at("params_prime").at("x"), cx);
  w.yp = elem_from_json(j.at("params_prime").at("y"), cx);
  w.zp = elem_from_json(j.at("params_prime").at("z"), cx);
  w.M = matrix_from_json(j.at("M"), cx);
  return w;
}

// ---------------------------------------------------------------------------
// independent re-verification from serialized data
// ---------------------------------------------------------------------------

struct VerifyOutcome {
  bool verified = false;       // the recomputed core clauses all pass
  bool matches_stored = false; // recomputed report/identities equal the stored ones
  json recomputed;
};

// Recomputes every clause and identity from the serialized data alone.  The
// identity list records facts (hypotheses may legitimately fail on degenerate
// inputs); "verified" covers the core clauses, "matches_stored" certifies the
// stored report is exactly what recomputation yields.
inline VerifyOutcome verify_certificate_json(const json& j) {
  VerifyOutcome out;
  std::string kind = j.at("kind").get<std::string>();
  VerificationReport report;
  std::vector<ClauseResult> identities;
  if (kind == "surface-lift") {
    SurfaceLiftCertificate c = surface_from_json(j);
    c.report = report = verify_isogeny(c.phi, c.fil, c.fil_prime);
    identities = surface_identity_checks(c);
  } else if (kind == "threefold-lift") {
    ThreefoldLiftCertificate c = threefold_from_json(j);
    c.report = report = verify_isogeny(c.phi, c.fil, c.fil_prime);
    identities = threefold_identity_checks(c);
  } else {
    throw usage_error("BadCertificate", "unknown certificate kind: " + kind);
  }
  out.verified = report.verified;
  json rec;
  rec["identities"] = identities_to_json(identities);
  rec["report"] = report_to_json(report);
  out.recomputed = rec;
  out.matches_stored =
      j.at("report") == rec["report"] && j.at("identities") == rec["identities"];
  return out;
}

} // namespace wittlift
