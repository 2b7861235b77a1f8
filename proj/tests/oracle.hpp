// oracle.hpp
// Brute-force reference implementations used only by tests. Nothing here
// calls into the library's arithmetic.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using Tuple = std::vector<std::uint32_t>;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

/// ||a v / L|| >= 1/(k+1), via the distance to the nearest integer as a
/// fraction d/L with d = min(m, L - m).
inline bool far_enough(std::uint64_t a, std::uint64_t v, std::uint64_t L, int k) {
  const std::uint64_t m = a * v % L;
  const std::uint64_t d = std::min(m, L - m);
  return d * static_cast<std::uint64_t>(k + 1) >= L;
}

inline bool is_witness(const Tuple& v, std::uint64_t a, std::uint64_t L, int k) {
  for (auto x : v) {
    if (!far_enough(a, x, L, k)) return false;
  }
  return true;
}

inline std::uint64_t smallest_witness(const Tuple& v, std::uint64_t L, int k) {
  for (std::uint64_t a = 0; a < L; ++a) {
    if (is_witness(v, a, L, k)) return a;
  }
  return L;
}

inline bool gcd_holds(const Tuple& v, std::uint32_t l) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t g = l;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j != i) g = std::gcd(g, v[j]);
    }
    if (g > 1) return true;
  }
  return false;
}

inline bool improper(const Tuple& v, int k, std::uint32_t p, std::uint32_t l) {
  return !gcd_holds(v, l) && smallest_witness(v, std::uint64_t{l} * p, k) == std::uint64_t{l} * p;
}

/// Orbit minimum under permutation, per-coordinate negation and unit scaling,
/// by enumerating every unit.
inline Tuple canonical(const Tuple& v, std::uint32_t p) {
  Tuple best;
  for (std::uint32_t u = 1; u < p; ++u) {
    Tuple w;
    for (auto x : v) {
      const std::uint32_t y = static_cast<std::uint32_t>(std::uint64_t{u} * x % p);
      w.push_back(std::min(y, p - y));
    }
    std::sort(w.begin(), w.end());
    if (w[0] != 1) continue;
    if (best.empty() || w < best) best = w;
  }
  return best;
}

/// Calls f on every tuple of Z_{p,l}^k (coordinates in [1, lp), not divisible by p).
template <class F>
void for_each_tuple(int k, std::uint32_t p, std::uint32_t l, F&& f) {
  const std::uint32_t L = l * p;
  Tuple v(static_cast<std::size_t>(k), 1);
  while (true) {
    f(v);
    int i = 0;
    for (; i < k; ++i) {
      do {
        ++v[i];
      } while (v[i] < L && v[i] % p == 0);
      if (v[i] < L) break;
      v[i] = 1;
    }
    if (i == k) return;
  }
}

/// Canonical classes of I(k, p, 1) by full enumeration of (Z_p \ 0)^k.
inline std::set<Tuple> canonical_improper(int k, std::uint32_t p) {
  std::set<Tuple> out;
  for_each_tuple(k, p, 1, [&](const Tuple& v) {
    if (improper(v, k, p, 1)) out.insert(canonical(v, p));
  });
  return out;
}

/// Improper members of the fiber of S at level c l.
inline std::set<Tuple> lift(const std::vector<Tuple>& s, int k, std::uint32_t p, std::uint32_t l, std::uint32_t c) {
  std::set<Tuple> out;
  const std::uint32_t L = l * p;
  for (const auto& v : s) {
    std::vector<std::uint32_t> j(static_cast<std::size_t>(k), 0);
    while (true) {
      Tuple u(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] + j[i] * L;
      if (improper(u, k, p, c * l)) out.insert(u);
      std::size_t i = 0;
      for (; i < j.size(); ++i) {
        if (++j[i] < c) break;
        j[i] = 0;
      }
      if (i == j.size()) break;
    }
  }
  return out;
}

}  // namespace oracle
