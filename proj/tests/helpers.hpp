#pragma once

#include "wittlift/obstruction.hpp"
#include "wittlift/sampling.hpp"

#include <random>

namespace testutil {

using namespace wittlift;

inline WittElem rand_elem(const Ctx& cx, std::mt19937_64& rng) {
  std::vector<u64> v(cx->deg);
  for (auto& t : v) t = rng() % cx->q;
  return WittElem(cx, std::move(v), cx->N);
}

inline WittElem rand_unit(const Ctx& cx, std::mt19937_64& rng) {
  while (true) {
    WittElem e = rand_elem(cx, rng);
    if (e.is_unit()) return e;
  }
}

} // namespace testutil
