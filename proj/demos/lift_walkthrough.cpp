// Walkthrough: build one certificate of each kind, print the clause table,
// and run the cube-lift obstruction on the same parameters.

#include "wittlift/sampling.hpp"
#include "wittlift/serialize.hpp"

#include <cstdio>

using namespace wittlift;

static void print_report(const char* title, const VerificationReport& rep,
                         const std::vector<ClauseResult>& ids) {
  std::printf("%s: %s (det valuation %d)\n", title, rep.verified ? "verified" : "FAILED",
              rep.det_valuation.value_or(-1));
  for (const auto& c : rep.clauses)
    std::printf("  clause   %-32s %s  (mod p^%d)\n", c.name.c_str(), c.pass ? "ok" : "FAIL",
                c.checked_mod);
  for (const auto& c : ids)
    std::printf("  identity %-32s %s  (mod p^%d)\n", c.name.c_str(), c.pass ? "ok" : "FAIL",
                c.checked_mod);
}

int main() {
  const u64 p = 5;
  Sampler sampler(42);
  auto c4 = WittContext::make(p, 4, 16);

  LiftOptions opts;
  opts.report_precision = 8;

  auto x = sampler.tracefree(c4, true);
  auto surface = surface_lift(x, opts);
  print_report("surface lift", surface.report, surface.identities);

  auto x3 = sampler.tracefree(c4, true);
  auto y3 = sampler.tracefree(c4, true);
  auto z3 = sampler.tracefree(c4, false);
  auto threefold = threefold_lift(x3, y3, z3, opts);
  print_report("threefold lift", threefold.report, threefold.identities);
  std::printf("threefold solver: residue degree %d, guarantee %d digits\n",
              threefold.extension_degree, threefold.guarantee);

  auto verdict = cube_lift_obstruction(threefold.x, threefold.y, threefold.z);
  std::printf("cube obstruction for the same module: %s (%s)\n", verdict.consequence.c_str(),
              verdict.detail.c_str());
  return 0;
}
