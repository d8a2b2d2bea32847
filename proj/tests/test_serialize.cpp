#include "helpers.hpp"
#include "wittlift/serialize.hpp"

#include <doctest.h>

using namespace wittlift;

TEST_CASE("element and context round-trips") {
  auto cx = WittContext::make(3, 2, 8);
  auto hdr = context_header(cx);
  auto cx2 = parse_context(hdr);
  CHECK(cx2.get() == cx.get()); // canonical registry context is reused
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    auto e = testutil::rand_elem(cx, rng).with_prec(3 + (int)(rng() % 6));
    auto j = elem_to_json(e);
    auto back = elem_from_json(j, cx);
    CHECK(back == e);
    CHECK(back.prec == e.prec);
  }
  // tower contexts rebuild from their headers
  auto tw = cx->extended();
  auto tw2 = parse_context(context_header(tw));
  CHECK(tw2->gpoly == tw->gpoly);
  CHECK(tw2->sigma_matrix() == tw->sigma_matrix());
}

TEST_CASE("surface certificate: serialize, re-verify, tamper") {
  Sampler s(555);
  auto c4 = WittContext::make(3, 4, 16);
  LiftOptions opts;
  opts.report_precision = 8;
  auto cert = surface_lift(s.tracefree(c4, true), opts);
  json j = surface_to_json(cert);

  // byte-identical reserialization
  auto cert2 = surface_from_json(j);
  cert2.report = verify_isogeny(cert2.phi, cert2.fil, cert2.fil_prime);
  cert2.identities = surface_identity_checks(cert2);
  CHECK(surface_to_json(cert2).dump() == j.dump());

  auto out = verify_certificate_json(j);
  CHECK(out.verified);
  CHECK(out.matches_stored);

  // flipping one digit anywhere in the data is detected
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    json bad = j;
    auto& entries = bad["phi"]["entries"];
    int idx = (int)(rng() % entries.size());
    auto& coeffs = entries[idx]["coeffs"];
    int ci = (int)(rng() % coeffs.size());
    u64 v = std::stoull(coeffs[ci].get<std::string>());
    coeffs[ci] = std::to_string(v + 1);
    auto bout = verify_certificate_json(bad);
    CHECK((!bout.verified || !bout.matches_stored));
  }
  {
    json bad = j;
    auto& coeffs = bad["derived"]["beta"]["coeffs"];
    u64 v = std::stoull(coeffs[0].get<std::string>());
    coeffs[0] = std::to_string(v + 1);
    auto bout = verify_certificate_json(bad);
    CHECK(!bout.matches_stored); // the coset equation identity flips
  }
}

TEST_CASE("threefold certificate: serialize and re-verify") {
  Sampler s(556);
  auto c4 = WittContext::make(3, 4, 16);
  LiftOptions opts;
  opts.report_precision = 8;
  auto cert = threefold_lift(s.tracefree(c4, true), s.tracefree(c4, true),
                             s.tracefree(c4, false), opts);
  json j = threefold_to_json(cert);
  auto out = verify_certificate_json(j);
  CHECK(out.verified);
  CHECK(out.matches_stored);

  json bad = j;
  auto& coeffs = bad["derived"]["Q"]["coeffs"];
  u64 v = std::stoull(coeffs[1].get<std::string>());
  coeffs[1] = std::to_string(v + 1);
  auto bout = verify_certificate_json(bad);
  CHECK(!bout.matches_stored);
}

TEST_CASE("witness round-trip") {
  Sampler s(557);
  auto cx = WittContext::make(3, 2, 8);
  WitnessBuilder wb(teichmuller(s.residue(cx, true)), teichmuller(s.residue(cx, true)),
                    teichmuller(s.residue(cx)));
  WittElem x0 = wb.x, y0 = wb.y, z0 = wb.z;
  wb.shear_21(s.generic(cx));
  wb.rescale(teichmuller(s.residue(cx, true)), teichmuller(s.residue(cx, true)),
             teichmuller(s.residue(cx, true)));
  auto w = wb.witness(x0, y0, z0);
  json j = witness_to_json(w);
  auto w2 = witness_from_json(j);
  CHECK(iso_matrix_check(w2));
  CHECK(witness_to_json(w2).dump() == j.dump());
}

TEST_CASE("determinism: equal seeds give byte-identical certificates") {
  for (int run = 0; run < 2; ++run) {
    // fresh sampler each run; contexts are cached globally but deterministic
    Sampler s(4242);
    auto c4 = WittContext::make(5, 4, 16);
    LiftOptions opts;
    opts.report_precision = 8;
    static std::string first;
    auto cert = surface_lift(s.tracefree(c4, true), opts);
    std::string dump = surface_to_json(cert).dump();
    if (run == 0)
      first = dump;
    else
      CHECK(dump == first);
  }
}
