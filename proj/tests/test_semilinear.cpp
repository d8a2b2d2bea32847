#include "helpers.hpp"

#include <doctest.h>

using namespace wittlift;
using testutil::rand_elem;
using testutil::rand_unit;

namespace {

// independent residue-field model for brute-force oracles: F_p[t]/(f) with an
// arbitrary irreducible f, found by scanning
struct BruteField {
  u64 p;
  int n;
  std::vector<u32> f;

  BruteField(u64 p_, int n_) : p(p_), n(n_) {
    std::vector<u32> cand(n + 1, 0);
    cand[n] = 1;
    while (true) {
      if (detail::fp_poly_irreducible(cand, p)) break;
      int i = 0;
      while (cand[i] == p - 1) cand[i++] = 0;
      REQUIRE(i < n);
      ++cand[i];
    }
    f = cand;
  }
  std::vector<u32> element(u64 idx) const {
    std::vector<u32> e(n);
    for (int i = 0; i < n; ++i) {
      e[i] = (u32)(idx % p);
      idx /= p;
    }
    return e;
  }
  u64 card() const { return detail::pow_u64(p, n); }
};

} // namespace

TEST_CASE("solve_asw: zero right-hand side") {
  auto cx = WittContext::make(3, 2, 8);
  auto sol = solve_asw(2, cx->zero());
  CHECK(sol.beta.is_zero());
  CHECK(sol.guarantee == 8);
  CHECK(sol.extension_degree_used == 2);
}

TEST_CASE("solve_asw: p=3, x=1 forces the extension the residue count predicts") {
  // b^9 - b = 1 has no root in F_9 and exactly 9 roots in F_{3^6}
  BruteField f9(3, 2), f36(3, 6);
  int roots9 = 0, roots36 = 0;
  for (u64 i = 0; i < f9.card(); ++i) {
    auto e = f9.element(i);
    auto lhs = detail::fp_poly_powmod(e, 9, f9.f, 3);
    bool hit = true;
    for (int k = 0; k < 2; ++k)
      if ((lhs[k] + 3 - e[k]) % 3 != (k == 0 ? 1u : 0u)) hit = false;
    if (hit) ++roots9;
  }
  for (u64 i = 0; i < f36.card(); ++i) {
    auto e = f36.element(i);
    auto lhs = detail::fp_poly_powmod(e, 9, f36.f, 3);
    bool hit = true;
    for (int k = 0; k < 6; ++k)
      if ((lhs[k] + 3 - e[k]) % 3 != (k == 0 ? 1u : 0u)) hit = false;
    if (hit) ++roots36;
  }
  CHECK(roots9 == 0);
  CHECK(roots36 == 9);

  auto cx = WittContext::make(3, 2, 8);
  auto sol = solve_asw(2, cx->one(), AswOptions{1, -1});
  CHECK(sol.extension_degree_used == 6);
  CHECK(sol.guarantee == 1);
  auto xr = embed(cx->one(), sol.beta.ctx);
  CHECK((sol.beta.frobenius_pow(2) - sol.beta).eq(xr, sol.guarantee));
}

TEST_CASE("solve_asw: residual vanishes at the certified guarantee") {
  std::mt19937_64 rng(41);
  for (u64 p : {3ull, 5ull}) {
    auto cx = WittContext::make(p, 2, 8);
    for (int t = 0; t < 10; ++t) {
      auto x = rand_elem(cx, rng);
      auto sol = solve_asw(2, x, AswOptions{-1, (int)(2 * p * p)});
      auto xr = embed(x, sol.beta.ctx);
      CHECK((sol.beta.frobenius_pow(2) - sol.beta).eq(xr, sol.guarantee));
      CHECK(sol.guarantee >= 1);
      // translation closure: beta + t solves for Teichmueller t of W(F_{p^2})
      const auto& ts = kernel_translates(sol.beta.ctx, 2);
      for (size_t k = 0; k < ts.size() && k < 10; ++k) {
        auto cand = sol.beta + ts[k];
        CHECK((cand.frobenius_pow(2) - cand).eq(xr, sol.guarantee));
      }
    }
  }
}

TEST_CASE("solve_asw: trace-free right-hand sides need no extension") {
  Sampler s(99);
  auto c4 = WittContext::make(3, 4, 8);
  for (int t = 0; t < 5; ++t) {
    auto x = s.tracefree(c4, true);
    auto sol = solve_asw(2, x);
    CHECK(sol.extension_degree_used == 4);
    CHECK(sol.guarantee == 8);
    CHECK((sol.beta.frobenius_pow(2) - sol.beta) == x);
  }
}

TEST_CASE("solution sets agree with the kernel coset at fixed precision") {
  // at guarantee g the solution set mod p^g is exactly beta + W_g(F_{p^2})
  auto cx = WittContext::make(3, 2, 2);
  auto sol = solve_asw(2, cx->zero());
  const auto& ts = kernel_translates(cx, 2);
  CHECK(ts.size() == 9);
  int count = 0;
  for (u64 i = 0; i < 81; ++i) {
    WittElem cand(cx, {i % 9, i / 9}, 2);
    if ((cand.frobenius_pow(2) - cand).is_zero()) ++count;
  }
  CHECK(count == 81); // sigma^2 = id on W(F_9): full kernel
}

TEST_CASE("solve_asw_with_conditions searches the coset deterministically") {
  auto cx = WittContext::make(3, 2, 8);
  auto sol = solve_asw_with_conditions(2, cx->zero(), {[](const WittElem& b) { return b; }});
  CHECK(sol.beta == cx->one()); // 0 fails the unit condition, 1 is next
  // an unsatisfiable condition exhausts the search
  CHECK_THROWS_WITH_AS(
      solve_asw_with_conditions(2, cx->zero(),
                                {[](const WittElem& b) { return b - b; }}),
      doctest::Contains("NoAdmissibleTranslate"), WittError);
}

TEST_CASE("solve_asw_with_conditions realizes the coset side-conditions") {
  std::mt19937_64 rng(43);
  auto cx = WittContext::make(3, 2, 8);
  for (int t = 0; t < 10; ++t) {
    auto y = rand_elem(cx, rng);
    auto bp = rand_unit(cx, rng);
    auto rhs = cx->from_int(3) * y * bp.frobenius();
    auto sol = solve_asw_with_conditions(
        2, rhs,
        {[](const WittElem& q) { return q; },
         [](const WittElem& q) { return WittElem::one(q.ctx) - q; },
         [](const WittElem& q) { return q - q.frobenius(); }},
        AswOptions{-1, 18});
    CHECK(sol.beta.is_unit());
    CHECK((WittElem::one(sol.beta.ctx) - sol.beta).is_unit());
    CHECK((sol.beta - sol.beta.frobenius()).is_unit());
    auto rr = embed(rhs, sol.beta.ctx);
    CHECK((sol.beta.frobenius_pow(2) - sol.beta).eq(rr, sol.guarantee));
  }
}

TEST_CASE("hensel_root basics") {
  auto cx = WittContext::make(3, 2, 8);
  auto one = cx->one();
  std::vector<WittElem> f = {-one, cx->zero(), one}; // X^2 - 1
  CHECK(hensel_root(f, ResidueElem::one(cx)) == one);
  // seed that is not a root
  std::vector<WittElem> g = {one, one}; // X + 1
  CHECK_THROWS_WITH_AS(hensel_root(g, ResidueElem::one(cx)), doctest::Contains("SeedNotRoot"),
                       WittError);
  // double root: derivative vanishes at the seed
  std::vector<WittElem> h = {one, cx->from_int(-2), one}; // (X-1)^2
  CHECK_THROWS_WITH_AS(hensel_root(h, ResidueElem::one(cx)), doctest::Contains("SeedNotSimple"),
                       WittError);
}

TEST_CASE("hensel_root solves the unit-root quadratic") {
  // p beta b^2 + u b - sigma^{-1}(beta) = 0 with u = sigma(zeta) - zeta
  std::mt19937_64 rng(47);
  for (u64 p : {3ull, 5ull, 7ull}) {
    auto cx = WittContext::make(p, 2, 8);
    auto z = cx->zeta();
    auto u = z.frobenius() - z;
    REQUIRE(u.is_unit());
    for (int t = 0; t < 20; ++t) {
      auto beta = rand_unit(cx, rng);
      std::vector<WittElem> f = {-beta.frobenius_inv(), u,
                                 WittElem::from_int(cx, (detail::i64)p) * beta};
      auto seed = beta.frobenius_inv().reduce_mod_p() * u.reduce_mod_p().inv();
      auto b = hensel_root(f, seed);
      CHECK(eval_poly(f, b).is_zero());
      CHECK(b.reduce_mod_p() == seed);
      CHECK(b.is_unit());
    }
  }
}

TEST_CASE("hensel_root normalizes polynomials with p-divisible coefficients") {
  // all coefficients divisible by p: one uniform strip-then-lift routine
  std::mt19937_64 rng(53);
  auto cx = WittContext::make(3, 2, 8);
  auto P = cx->from_int(3);
  for (int t = 0; t < 10; ++t) {
    auto a2 = P * P * rand_elem(cx, rng);
    auto a1 = P * rand_unit(cx, rng);
    auto a0 = P * rand_elem(cx, rng);
    std::vector<WittElem> f = {a0, a1, a2};
    auto seed = ResidueElem::zero(cx) -
                a0.divide_exact(1).reduce_mod_p() * a1.divide_exact(1).reduce_mod_p().inv();
    auto c = hensel_root(f, seed);
    CHECK(eval_poly(f, c).is_zero(c.prec));
    CHECK(c.prec == 7); // one digit paid for the normalization
  }
}
