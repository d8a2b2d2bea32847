#pragma once

// Deterministic, seed-driven parameter sampling.  Two families:
//
//  - generic: the Teichmueller lift of a uniformly random residue vector;
//  - tracefree: sum p^j [xi_j] with every digit xi_j on the eigenline
//    {xi : xi^{p^2} = -xi} of F_{p^4}.  These satisfy sigma^2(x) = -x exactly,
//    so sigma^2(beta) - beta = x is solvable at full precision without residue
//    field extensions, which is what makes full-precision certificates cheap.
//    For generic parameters every extra certified digit costs a factor of p in
//    residue degree (the relative trace to W(F_{p^2}) obstructs the equation at
//    finite level), so generic draws come with correspondingly reduced
//    guarantees.

#include "wittlift/witt.hpp"

#include <random>
#include <string>
#include <vector>

namespace wittlift {

struct Sampler {
  std::mt19937_64 rng;
  u64 seed;
  std::vector<std::string> draws; // draw log for reproducibility

  explicit Sampler(u64 s) : rng(s), seed(s) {}

  u64 below(u64 n) { return rng() % n; }

  ResidueElem residue(const Ctx& cx, bool nonzero = false) {
    while (true) {
      std::vector<u32> c(cx->deg);
      bool nz = false;
      for (auto& v : c) {
        v = (u32)below(cx->p);
        nz = nz || v;
      }
      if (nonzero && !nz) continue;
      draws.push_back("residue(" + cx->describe() + ")");
      return ResidueElem(cx, std::move(c));
    }
  }

  // Teichmueller lift of a uniform residue vector
  WittElem generic(const Ctx& cx, bool unit = false) {
    WittElem out = teichmuller(residue(cx, unit));
    draws.back() = "generic(" + cx->describe() + (unit ? ",unit)" : ")");
    return out;
  }

  // full Witt expansion with uniform Teichmueller digits
  WittElem generic_deep(const Ctx& cx, bool unit = false) {
    WittElem acc = WittElem::zero(cx);
    WittElem pj = WittElem::one(cx);
    for (int j = 0; j < cx->N; ++j) {
      acc = acc + pj * teichmuller(residue(cx, unit && j == 0));
      pj = pj * WittElem::from_int(cx, (detail::i64)cx->p);
    }
    draws.push_back("generic_deep(" + cx->describe() + ")");
    return acc;
  }

  // digitwise draw from the sigma^2 = -1 eigenline of W(F_{p^4}); requires a
  // degree-4 context
  WittElem tracefree(const Ctx& c4, bool unit = false) {
    if (c4->deg != 4)
      throw usage_error("BadDegree", "tracefree sampling needs residue degree 4");
    u64 p = c4->p;
    u64 p2 = p * p;
    WittElem line_gen(c4, c4->raw_pow(c4->zeta().c, (p2 + 1) / 2), c4->N);
    WittElem sub_gen(c4, c4->raw_pow(c4->zeta().c, p2 + 1), c4->N); // F_{p^2} Teichmuellers
    WittElem acc = WittElem::zero(c4);
    WittElem pj = WittElem::one(c4);
    for (int j = 0; j < c4->N; ++j) {
      u64 r = below(p2);
      if (j == 0 && unit && r == 0) r = 1 + below(p2 - 1);
      if (r != 0) {
        WittElem t = line_gen;
        for (u64 k = 1; k < r; ++k) t = t * sub_gen;
        acc = acc + pj * t;
      }
      pj = pj * WittElem::from_int(c4, (detail::i64)p);
    }
    draws.push_back("tracefree(" + c4->describe() + (unit ? ",unit)" : ")"));
    return acc;
  }
};

} // namespace wittlift
