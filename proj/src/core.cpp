// core.cpp

#include "lrc/core.hpp"

#include <algorithm>
#include <numeric>

namespace lrc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::ZeroCoordinate: return "ZeroCoordinate";
    case ErrorCode::NotInNk: return "NotInNk";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::GateClosed: return "GateClosed";
    case ErrorCode::Corrupt: return "Corrupt";
    case ErrorCode::Io: return "Io";
    case ErrorCode::SizeCap: return "SizeCap";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(u128{a} * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t small : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % small == 0) return n == small;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are a proven deterministic set below 2^64.
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t next_prime(std::uint64_t n) {
  std::uint64_t c = n + 1;
  while (!is_prime(c)) ++c;
  return c;
}

Residue mod_inverse(Residue a, Residue m) {
  std::int64_t old_r = a % m, r = m;
  std::int64_t old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
  }
  if (old_r != 1) {
    throw Error(ErrorCode::InvalidParams,
                std::to_string(a) + " is not invertible mod " + std::to_string(m));
  }
  std::int64_t inv = old_s % static_cast<std::int64_t>(m);
  if (inv < 0) inv += m;
  return static_cast<Residue>(inv);
}

AnsatzParams::AnsatzParams(int k, Residue p, Residue l) : k_(k), p_(p), l_(l) {
  if (k < 2) throw Error(ErrorCode::InvalidParams, "k must be at least 2, got " + std::to_string(k));
  if (l < 1) throw Error(ErrorCode::InvalidParams, "l must be at least 1");
  if (!is_prime(p)) throw Error(ErrorCode::NotPrime, std::to_string(p) + " is not prime");
  const Wide lp = Wide{l} * p;
  if (lp >= kMaxModulus) {
    throw Error(ErrorCode::Overflow, "modulus l*p = " + std::to_string(lp) +
                                         " exceeds the exact-integer range");
  }
  modulus_ = static_cast<Residue>(lp);
  // (k+1) m >= lp  <=>  m >= ceil(lp / (k+1));  (k+1) m <= k lp  <=>  m <= floor(k lp / (k+1)).
  const Wide kp1 = Wide(k) + 1;
  lo_ = static_cast<Residue>((lp + kp1 - 1) / kp1);
  hi_ = static_cast<Residue>(Wide(k) * lp / kp1);
}

AnsatzParams AnsatzParams::lifted(Residue c) const {
  if (c < 2) throw Error(ErrorCode::InvalidParams, "lift factor must be at least 2");
  if (c > max_lift_factor()) {
    throw Error(ErrorCode::Overflow, "lift by " + std::to_string(c) + " overflows; maximal admissible c is " +
                                         std::to_string(max_lift_factor()));
  }
  return AnsatzParams(k_, p_, l_ * c);
}

Residue AnsatzParams::max_lift_factor() const noexcept {
  return static_cast<Residue>((kMaxModulus - 1) / modulus_);
}

void validate_tuple(std::span<const Residue> coords, const AnsatzParams& params) {
  if (coords.size() != static_cast<std::size_t>(params.k())) {
    throw Error(ErrorCode::InvalidParams, "tuple has " + std::to_string(coords.size()) +
                                              " coordinates, expected " + std::to_string(params.k()));
  }
  for (Residue c : coords) {
    if (c >= params.modulus()) {
      throw Error(ErrorCode::InvalidParams, "coordinate " + std::to_string(c) + " is not below lp = " +
                                                std::to_string(params.modulus()));
    }
    if (c % params.p() == 0) {
      throw Error(ErrorCode::ZeroCoordinate, "coordinate " + std::to_string(c) + " is divisible by p = " +
                                                 std::to_string(params.p()));
    }
  }
}

SpeedTuple::SpeedTuple(std::vector<Residue> c, AnsatzParams prm) : coords(std::move(c)), params(prm) {
  validate_tuple(coords, params);
}

namespace {

// Writes sort(fold(scale * t mod p)) into out.
void scaled_folded(std::span<const Residue> t, Residue scale, Residue p, std::vector<Residue>& out) {
  out.resize(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    out[j] = fold(static_cast<Residue>(Wide{scale} * t[j] % p), p);
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

CanonicalTuple canonicalize(std::span<const Residue> t, Residue p) {
  for (Residue c : t) {
    if (c % p == 0) {
      throw Error(ErrorCode::ZeroCoordinate, "canonicalize: coordinate " + std::to_string(c) +
                                                 " is zero mod " + std::to_string(p));
    }
  }
  std::vector<Residue> best, candidate;
  for (std::size_t i = 0; i < t.size(); ++i) {
    scaled_folded(t, mod_inverse(t[i] % p, p), p, candidate);
    if (best.empty() || candidate < best) best.swap(candidate);
  }
  return CanonicalTuple{std::move(best), p};
}

bool is_canonical(std::span<const Residue> coords, Residue p) {
  if (coords.empty() || coords[0] != 1) return false;
  const Residue half = (p - 1) / 2;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] == 0 || coords[i] > half) return false;
    if (i > 0 && coords[i] < coords[i - 1]) return false;
  }
  std::vector<Residue> candidate;
  for (std::size_t i = 1; i < coords.size(); ++i) {
    if (coords[i] == coords[i - 1]) continue;  // same scale as an earlier index
    scaled_folded(coords, mod_inverse(coords[i], p), p, candidate);
    if (std::lexicographical_compare(candidate.begin(), candidate.end(), coords.begin(), coords.end())) {
      return false;
    }
  }
  return true;
}

std::optional<int> gcd_omission(std::span<const Residue> coords, Residue l) {
  if (l == 1 || coords.empty()) return std::nullopt;
  const std::size_t k = coords.size();
  // prefix[i] = gcd(l, c_0..c_{i-1}); suffix[i] = gcd(l, c_i..c_{k-1}).
  std::vector<Residue> prefix(k + 1), suffix(k + 1);
  prefix[0] = l;
  for (std::size_t i = 0; i < k; ++i) prefix[i + 1] = std::gcd(prefix[i], coords[i]);
  suffix[k] = l;
  for (std::size_t i = k; i-- > 0;) suffix[i] = std::gcd(suffix[i + 1], coords[i]);
  for (std::size_t i = 0; i < k; ++i) {
    if (std::gcd(prefix[i], suffix[i + 1]) > 1) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace lrc
