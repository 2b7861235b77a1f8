// analytic.cpp

#include "lrc/analytic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "lrc/parallel.hpp"
#include "lrc/witness.hpp"

namespace lrc {

RkVector rk_eval(std::int64_t a, std::int64_t b, int k) {
  if (b <= 0) throw Error(ErrorCode::InvalidParams, "rk_eval: denominator must be positive");
  RkVector out;
  out.entries.resize(static_cast<std::size_t>(k));
  std::int64_t base = a % b;
  if (base < 0) base += b;
  for (int i = 1; i <= k; ++i) {
    const auto frac_num = static_cast<__int128>(base) * i % b;  // frac(i t) = frac_num / b
    out.entries[static_cast<std::size_t>(i - 1)] = static_cast<int>((k + 1) * frac_num / b);
  }
  return out;
}

std::vector<RkVector> rk_image(int k, std::int64_t d) {
  std::vector<RkVector> out;
  out.reserve(static_cast<std::size_t>(d));
  for (std::int64_t n = 0; n < d; ++n) out.push_back(rk_eval(n, d, k));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool rk_inclusion(int k, Residue p) {
  const auto coarse = rk_image(k, k + 1);
  const auto fine = rk_image(k, p);
  return std::includes(fine.begin(), fine.end(), coarse.begin(), coarse.end());
}

DiscontinuityGaps discontinuity_gaps(int k) {
  // Common denominator D = lcm(1..k) (k+1); a/(i(k+1)) = a (D / (i(k+1))) / D.
  std::uint64_t lcm = 1;
  for (int i = 1; i <= k; ++i) lcm = std::lcm(lcm, static_cast<std::uint64_t>(i));
  const std::uint64_t kp1 = static_cast<std::uint64_t>(k) + 1;
  const std::uint64_t D = lcm * kp1;
  std::vector<std::uint64_t> points;
  for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(k); ++i) {
    const std::uint64_t step = D / (i * kp1);
    for (std::uint64_t a = 0; a < i * kp1; ++a) points.push_back(a * step);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const std::uint64_t grid_step = D / kp1;
  std::uint64_t min_consecutive = D, min_after_grid = D;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const std::uint64_t next = j + 1 < points.size() ? points[j + 1] : D + points[0];
    const std::uint64_t gap = next - points[j];
    min_consecutive = std::min(min_consecutive, gap);
    if (points[j] % grid_step == 0) min_after_grid = std::min(min_after_grid, gap);
  }
  auto reduce = [D](std::uint64_t n) {
    const std::uint64_t g = std::gcd(n, D);
    return Gap{n / g, D / g};
  };
  return {reduce(min_after_grid), reduce(min_consecutive)};
}

bool in_nk(int k, std::span<const int> v) {
  if (v.size() != static_cast<std::size_t>(k)) return false;
  bool any_zero = false, any_nonzero = false;
  for (int x : v) {
    if (x < 0 || x > k) return false;
    (x == 0 ? any_zero : any_nonzero) = true;
  }
  return any_zero && any_nonzero;
}

std::uint64_t nk_size(int k) {
  std::uint64_t total = 1, same = 1;
  for (int i = 0; i < k; ++i) {
    total *= static_cast<std::uint64_t>(k) + 1;
    same *= static_cast<std::uint64_t>(k);
  }
  return total - same - 1;
}

namespace {

void require_odd_prime_modulus(int k) {
  if (k < 2 || !is_prime(static_cast<std::uint64_t>(k) + 1)) {
    throw Error(ErrorCode::InvalidParams, "k + 1 must be an odd prime, got k = " + std::to_string(k));
  }
}

std::optional<UnitPair> search_pairs(int k, std::span<const int> v) {
  const int m = k + 1;
  for (int s = 1; s <= k; ++s) {
    for (int r = 1; r <= k; ++r) {
      bool ok = true;
      for (int i = 1; i <= k && ok; ++i) {
        const int x = (s * v[static_cast<std::size_t>(i - 1)] + r * i) % m;
        ok = x >= 1 && x <= k - 1;
      }
      if (ok) return UnitPair{s, r};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<UnitPair> poly_check(int k, std::span<const int> v) {
  require_odd_prime_modulus(k);
  if (!in_nk(k, v)) throw Error(ErrorCode::NotInNk, "vector is not in N_" + std::to_string(k));
  return search_pairs(k, v);
}

PolyReport poly_check_all_exhaustive(int k, std::uint64_t cap, unsigned threads) {
  require_odd_prime_modulus(k);
  const std::uint64_t m = static_cast<std::uint64_t>(k) + 1;
  std::uint64_t total = 1;
  for (int i = 0; i < k; ++i) {
    if (total > cap / m) {
      throw Error(ErrorCode::SizeCap, "exhaustive check of N_" + std::to_string(k) + " exceeds the cap of " +
                                          std::to_string(cap) + " vectors");
    }
    total *= m;
  }
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<PolyReport> parts(chunk_count(total, kChunk));
  parallel_chunks(total, kChunk, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<int> v(static_cast<std::size_t>(k));
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      std::uint64_t rest = idx;
      for (auto& x : v) {
        x = static_cast<int>(rest % m);
        rest /= m;
      }
      if (!in_nk(k, v)) continue;
      ++parts[chunk].checked;
      if (!search_pairs(k, v)) parts[chunk].counterexamples.push_back(v);
    }
  });
  PolyReport report{k, true, 0, 0, {}};
  for (auto& part : parts) {
    report.checked += part.checked;
    for (auto& c : part.counterexamples) report.counterexamples.push_back(std::move(c));
  }
  return report;
}

PolyReport poly_check_all_sample(int k, std::uint64_t n, std::uint64_t seed, unsigned threads) {
  require_odd_prime_modulus(k);
  // Each chunk draws from its own stream seeded by (seed, chunk) so the result
  // does not depend on the thread count.
  constexpr std::size_t kChunk = 1 << 14;
  std::vector<PolyReport> parts(chunk_count(n, kChunk));
  parallel_chunks(n, kChunk, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> digit(0, k);
    std::vector<int> v(static_cast<std::size_t>(k));
    for (std::size_t i = begin; i < end; ++i) {
      do {
        for (auto& x : v) x = digit(rng);
      } while (!in_nk(k, v));
      ++parts[chunk].checked;
      if (!search_pairs(k, v)) parts[chunk].counterexamples.push_back(v);
    }
  });
  PolyReport report{k, false, seed, 0, {}};
  for (auto& part : parts) {
    report.checked += part.checked;
    for (auto& c : part.counterexamples) report.counterexamples.push_back(std::move(c));
  }
  return report;
}

const char* to_string(GateRoute r) {
  return r == GateRoute::LargePrime ? "p>k(k+1)" : "rk-inclusion";
}

GateRoute gate_route(int k, Residue p) {
  if (k < 2 || !is_prime(static_cast<std::uint64_t>(k) + 1)) {
    throw Error(ErrorCode::GateClosed, "gate closed: k + 1 = " + std::to_string(k + 1) + " is not an odd prime");
  }
  if (!is_prime(p) || p == 2) {
    throw Error(ErrorCode::GateClosed, "gate closed: p = " + std::to_string(p) + " is not an odd prime");
  }
  if (static_cast<Wide>(p) <= static_cast<Wide>(k) + 1) {
    throw Error(ErrorCode::GateClosed, "gate closed: p = " + std::to_string(p) + " does not exceed k + 1");
  }
  if (static_cast<Wide>(p) > static_cast<Wide>(k) * (k + 1)) return GateRoute::LargePrime;
  if (rk_inclusion(k, p)) return GateRoute::RkInclusion;
  throw Error(ErrorCode::GateClosed, "gate closed: p = " + std::to_string(p) + " <= k(k+1) = " +
                                         std::to_string(k * (k + 1)) + " and r_k inclusion fails");
}

FiberCertificate certify_one_to_k(int k, Residue p, const GateOptions& options) {
  FiberCertificate cert;
  cert.k = k;
  cert.p = p;
  cert.route = gate_route(k, p);
  cert.seed = options.seed;

  const Residue kp1 = static_cast<Residue>(k + 1);
  const AnsatzParams params(k, p, kp1);
  const WitnessTable table(params);
  const Residue lp = params.modulus();
  const Residue p_inv = mod_inverse(p % kp1, kp1);
  const Residue kp1_inv = mod_inverse(kp1 % p, p);

  std::uint64_t fiber = 1;
  bool small = true;
  for (int i = 0; i < k && small; ++i) {
    if (fiber > options.exhaustive_cap / kp1) {
      small = false;
    } else {
      fiber *= kp1;
    }
  }
  cert.exhaustive = small;
  const std::uint64_t count = small ? fiber : options.samples;

  struct Tally {
    std::uint64_t checked = 0, improper = 0, by_gcd = 0, by_witness = 0, decomposed = 0;
  };
  constexpr std::size_t kChunk = 4096;
  std::vector<Tally> parts(chunk_count(count, kChunk));
  parallel_chunks(count, kChunk, options.threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<Residue> lift_digit(0, kp1 - 1);
    std::vector<Residue> u(static_cast<std::size_t>(k));
    std::vector<Word> acc, scratch;
    Tally& t = parts[chunk];
    for (std::size_t idx = begin; idx < end; ++idx) {
      std::uint64_t rest = idx;
      for (int i = 1; i <= k; ++i) {
        Residue j;
        if (small) {
          j = static_cast<Residue>(rest % kp1);
          rest /= kp1;
        } else {
          j = lift_digit(rng);
        }
        u[static_cast<std::size_t>(i - 1)] = static_cast<Residue>(i) + j * p;
      }
      ++t.checked;
      if (gcd_condition(u, kp1)) {
        ++t.by_gcd;
        continue;
      }
      const Residue a = smallest_witness(u, table, acc, scratch);
      if (a >= lp) {
        ++t.improper;
        continue;
      }
      ++t.by_witness;
      // a / ((k+1) p) = s / (k+1) + r / p  <=>  a = s p + r (k+1)  (mod (k+1) p).
      const Wide s = Wide{a} % kp1 * p_inv % kp1;
      const Wide r = Wide{a} % p * kp1_inv % p;
      const bool decomposes = (s * p + r * kp1) % lp == a;
      if (decomposes && witness_certificate_check(u, k, lp, a)) ++t.decomposed;
    }
  });
  for (const Tally& t : parts) {
    cert.checked += t.checked;
    cert.improper += t.improper;
    cert.by_gcd += t.by_gcd;
    cert.by_witness += t.by_witness;
    cert.decomposed += t.decomposed;
  }
  return cert;
}

}  // namespace lrc
