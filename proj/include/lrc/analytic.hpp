// analytic.hpp
// Machinery for the eventual properness of (1, 2, ..., k) when k + 1 is an odd
// prime: the arc discretization r_k, its inclusion test between the grids
// (1/(k+1))Z and (1/p)Z, the extensional check of the unit-pair statement over
// N_k, and the fiber gate for (1, ..., k).

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrc/core.hpp"

namespace lrc {

/// Entry i-1 is floor((k+1) * frac(i t)), the arc of width 1/(k+1) occupied by
/// the runner with speed i.
struct RkVector {
  std::vector<int> entries;
  auto operator<=>(const RkVector&) const = default;
};

/// r_k(a / b), exact. b > 0; a may be negative.
RkVector rk_eval(std::int64_t a, std::int64_t b, int k);

/// Sorted, deduplicated {r_k(n / d) : n in [0, d)}.
std::vector<RkVector> rk_image(int k, std::int64_t d);

/// r_k((1/(k+1))Z) is a subset of r_k((1/p)Z).
bool rk_inclusion(int k, Residue p);

/// An exact rational gap num / den.
struct Gap {
  std::uint64_t num;
  std::uint64_t den;
  bool at_least(std::uint64_t n, std::uint64_t d) const {
    return static_cast<unsigned __int128>(num) * d >= static_cast<unsigned __int128>(n) * den;
  }
};

struct DiscontinuityGaps {
  /// min over n of (next discontinuity after n/(k+1)) - n/(k+1).
  Gap after_grid_points;
  /// min distance between any two consecutive discontinuities.
  Gap consecutive;
};

/// Enumerates all discontinuities a/(i(k+1)), 1 <= i <= k, over one period.
DiscontinuityGaps discontinuity_gaps(int k);

/// Nonzero vectors mod k+1 with at least one zero coordinate.
bool in_nk(int k, std::span<const int> v);

/// |N_k| = (k+1)^k - k^k - 1.
std::uint64_t nk_size(int k);

struct UnitPair {
  int s;
  int r;
  bool operator==(const UnitPair&) const = default;
};

/// First (s, r) in row-major order over units mod k+1 such that every
/// coordinate of s v + r (1..k) mod (k+1) is in {1, ..., k-1}.
/// Throws NotInNk when v is not in N_k and InvalidParams unless k+1 is an odd
/// prime.
std::optional<UnitPair> poly_check(int k, std::span<const int> v);

struct PolyReport {
  int k = 0;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  std::uint64_t checked = 0;
  std::vector<std::vector<int>> counterexamples;
};

inline constexpr std::uint64_t kPolyExhaustiveCap = 100'000'000;

/// Every v in N_k. Refused (SizeCap) when (k+1)^k exceeds cap.
PolyReport poly_check_all_exhaustive(int k, std::uint64_t cap = kPolyExhaustiveCap, unsigned threads = 1);

/// n vectors drawn uniformly from N_k with the given seed.
PolyReport poly_check_all_sample(int k, std::uint64_t n, std::uint64_t seed, unsigned threads = 1);

enum class GateRoute { LargePrime, RkInclusion };
const char* to_string(GateRoute r);

/// How the precondition for the (1..k) fiber argument holds for (k, p).
/// Throws GateClosed naming the failing condition.
GateRoute gate_route(int k, Residue p);

struct GateOptions {
  std::uint64_t seed = 1;
  std::uint64_t exhaustive_cap = 1'000'000;
  std::uint64_t samples = 10'000;
  unsigned threads = 1;
};

struct FiberCertificate {
  int k = 0;
  Residue p = 0;
  GateRoute route = GateRoute::LargePrime;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  std::uint64_t checked = 0;
  std::uint64_t improper = 0;
  std::uint64_t by_gcd = 0;
  std::uint64_t by_witness = 0;
  /// Witness numerators a confirmed as a / ((k+1) p) = s/(k+1) + r/p and
  /// re-checked by the independent certificate checker.
  std::uint64_t decomposed = 0;

  bool open() const { return improper == 0 && by_witness == decomposed; }
};

/// Asserts (1..k) is eventually (k, p)-proper and verifies it on the fiber of
/// (1..k) mod (k+1)p: exhaustively when (k+1)^k <= exhaustive_cap, otherwise
/// on `samples` seeded random fiber elements.
FiberCertificate certify_one_to_k(int k, Residue p, const GateOptions& options = {});

}  // namespace lrc
