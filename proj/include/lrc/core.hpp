// core.hpp
// Exact modular arithmetic for speed tuples: ansatz parameters, the integer
// form of the distance-to-nearest-integer test, sign folding and canonical
// representatives under permutation / sign flip / unit scaling.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrc {

using Residue = std::uint32_t;
using Wide = std::uint64_t;

enum class ErrorCode {
  InvalidParams,
  NotPrime,
  Overflow,
  ZeroCoordinate,
  NotInNk,
  Parse,
  GateClosed,
  Corrupt,
  Io,
  SizeCap,
  Usage,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(std::uint64_t n);

/// Smallest prime strictly greater than n.
std::uint64_t next_prime(std::uint64_t n);

/// Inverse of a modulo m. Throws InvalidParams when gcd(a, m) != 1.
Residue mod_inverse(Residue a, Residue m);

/// Largest modulus lp accepted by AnsatzParams. Keeps lp^2 and (k+1)*lp well
/// inside 64 bits and residues inside 32 bits.
inline constexpr Wide kMaxModulus = Wide{1} << 31;

/// The triple (k, p, l): speeds live in Z_{lp} minus multiples of p, times in
/// (1/lp)Z. Validated at construction.
class AnsatzParams {
 public:
  AnsatzParams(int k, Residue p, Residue l = 1);

  int k() const noexcept { return k_; }
  Residue p() const noexcept { return p_; }
  Residue l() const noexcept { return l_; }
  /// lp, the denominator of admissible times.
  Residue modulus() const noexcept { return modulus_; }

  /// Smallest and largest m with lp <= (k+1) m <= k lp.
  Residue window_lo() const noexcept { return lo_; }
  Residue window_hi() const noexcept { return hi_; }

  AnsatzParams lifted(Residue c) const;
  AnsatzParams base() const { return AnsatzParams(k_, p_, 1); }

  /// Largest c such that lifted(c) is constructible.
  Residue max_lift_factor() const noexcept;

  bool operator==(const AnsatzParams&) const = default;

 private:
  int k_;
  Residue p_;
  Residue l_;
  Residue modulus_;
  Residue lo_;
  Residue hi_;
};

/// A speed tuple in Z_{p,l}^k. Every coordinate is below lp and nonzero mod p.
struct SpeedTuple {
  std::vector<Residue> coords;
  AnsatzParams params;

  SpeedTuple(std::vector<Residue> c, AnsatzParams prm);
};

/// Throws InvalidParams if coords do not form a speed tuple for params.
void validate_tuple(std::span<const Residue> coords, const AnsatzParams& params);

/// True iff time a/(lp) puts speed v at distance >= 1/(k+1) from an integer.
inline bool norm_ok(Residue a, Residue v, const AnsatzParams& params) {
  const Wide lp = params.modulus();
  const Wide m = (Wide{a} * v) % lp;
  const Wide scaled = Wide(params.k() + 1) * m;
  return lp <= scaled && scaled <= Wide(params.k()) * lp;
}

/// min(x, p - x) for x in [0, p).
inline Residue fold(Residue x, Residue p) { return x == 0 ? 0 : std::min(x, p - x); }

struct CanonicalTuple {
  std::vector<Residue> coords;
  Residue prime;

  bool operator==(const CanonicalTuple&) const = default;
};

/// Canonical representative of the orbit of t (coordinates mod p, all
/// nonzero). Throws ZeroCoordinate when some coordinate is 0 mod p.
CanonicalTuple canonicalize(std::span<const Residue> t, Residue p);

/// True iff coords already equal canonicalize(coords, p).
bool is_canonical(std::span<const Residue> coords, Residue p);

/// First index i with gcd(l, coords without i) > 1, if any.
std::optional<int> gcd_omission(std::span<const Residue> coords, Residue l);

inline bool gcd_condition(std::span<const Residue> coords, Residue l) {
  return gcd_omission(coords, l).has_value();
}
inline bool gcd_condition(const SpeedTuple& v) {
  return gcd_condition(v.coords, v.params.l());
}

}  // namespace lrc
