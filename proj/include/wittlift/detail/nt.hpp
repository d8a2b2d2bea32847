#pragma once

// Scalar number theory mod q = p^N with q < 2^62.

#include <cstdint>
#include <vector>
#include <utility>
#include <algorithm>

namespace wittlift::detail {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline u64 addmod(u64 a, u64 b, u64 q) {
  u64 s = a + b;
  return s >= q ? s - q : s;
}

inline u64 submod(u64 a, u64 b, u64 q) { return a >= b ? a - b : a + q - b; }

inline u64 mulmod(u64 a, u64 b, u64 q) { return (u64)((u128)a * b % q); }

inline u64 powmod(u64 a, u64 e, u64 q) {
  u64 r = 1 % q;
  a %= q;
  while (e) {
    if (e & 1) r = mulmod(r, a, q);
    a = mulmod(a, a, q);
    e >>= 1;
  }
  return r;
}

// Miller-Rabin, deterministic for 64-bit inputs.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 sp : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % sp == 0) return n == sp;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a % n, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) { composite = false; break; }
    }
    if (composite) return false;
  }
  return true;
}

inline u64 pollard_rho(u64 n) {
  if ((n & 1) == 0) return 2;
  u64 c = 1;
  while (true) {
    u64 x = 2, y = 2, d = 1;
    auto f = [&](u64 v) { return addmod(mulmod(v, v, n), c, n); };
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      u64 diff = x > y ? x - y : y - x;
      if (diff == 0) break;
      u64 a = diff, b = n;
      while (b) { u64 t = a % b; a = b; b = t; }
      d = a;
    }
    if (d != 1 && d != n) return d;
    ++c;
  }
}

// Distinct prime factors of n.
inline std::vector<u64> prime_factors(u64 n) {
  std::vector<u64> out;
  for (u64 d = 2; d * d <= n && d < (1u << 20); ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  std::vector<u64> stack;
  if (n > 1) stack.push_back(n);
  while (!stack.empty()) {
    u64 m = stack.back();
    stack.pop_back();
    if (m == 1) continue;
    if (is_prime_u64(m)) {
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
      continue;
    }
    u64 d = pollard_rho(m);
    stack.push_back(d);
    stack.push_back(m / d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline int val_u64(u64 x, u64 p) {
  int v = 0;
  while (x && x % p == 0) { x /= p; ++v; }
  return v;
}

inline u64 pow_u64(u64 a, int e) {
  u64 r = 1;
  while (e-- > 0) r *= a;
  return r;
}

} // namespace wittlift::detail
