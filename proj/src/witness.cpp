// witness.cpp

#include "lrc/witness.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace lrc {

NumeratorSet::NumeratorSet(Residue denominator)
    : denominator_(denominator), bits_(words_for(denominator), ~Word{0}) {
  if (const Residue tail = denominator % 64; tail != 0 && !bits_.empty()) {
    bits_.back() = (Word{1} << tail) - 1;
  }
}

void NumeratorSet::clear_all() { std::fill(bits_.begin(), bits_.end(), Word{0}); }

std::size_t NumeratorSet::count() const {
  std::size_t n = 0;
  for (Word w : bits_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool NumeratorSet::empty() const {
  return std::all_of(bits_.begin(), bits_.end(), [](Word w) { return w == 0; });
}

Residue NumeratorSet::first() const {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) return static_cast<Residue>(i * 64 + std::countr_zero(bits_[i]));
  }
  return denominator_;
}

void NumeratorSet::intersect(std::span<const Word> other) {
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other[i];
}

std::vector<Residue> NumeratorSet::members() const {
  std::vector<Residue> out;
  for (Residue a = 0; a < denominator_; ++a) {
    if (test(a)) out.push_back(a);
  }
  return out;
}

void fill_admissible_row(Residue v, const AnsatzParams& params, std::span<Word> out) {
  std::fill(out.begin(), out.end(), Word{0});
  const Residue lp = params.modulus();
  const Residue lo = params.window_lo(), hi = params.window_hi();
  const Residue step = v % lp;
  Residue m = 0;  // (a * v) mod lp, advanced incrementally
  for (Residue a = 0; a < lp; ++a) {
    if (m >= lo && m <= hi) out[a >> 6] |= Word{1} << (a & 63);
    m += step;
    if (m >= lp) m -= lp;
  }
}

NumeratorSet admissible_set(Residue v, const AnsatzParams& params) {
  std::vector<Word> row(words_for(params.modulus()));
  fill_admissible_row(v, params, row);
  NumeratorSet out(params.modulus());
  out.intersect(row);
  return out;
}

WitnessTable::WitnessTable(const AnsatzParams& params, std::size_t max_table_bytes)
    : params_(params), words_(words_for(params.modulus())) {
  const std::size_t lp = params.modulus();
  if (lp * words_ * sizeof(Word) <= max_table_bytes) {
    table_.assign(lp * words_, 0);
    for (Residue v = 0; v < lp; ++v) {
      if (v % params.p() == 0) continue;  // never a coordinate of a speed tuple
      fill_admissible_row(v, params, std::span<Word>(table_).subspan(std::size_t{v} * words_, words_));
    }
  }
}

std::span<const Word> WitnessTable::row(Residue v, std::vector<Word>& scratch) const {
  if (!table_.empty()) return std::span<const Word>(table_).subspan(std::size_t{v} * words_, words_);
  scratch.resize(words_);
  fill_admissible_row(v, params_, scratch);
  return scratch;
}

Residue smallest_witness(std::span<const Residue> coords, const WitnessTable& table, std::vector<Word>& acc,
                         std::vector<Word>& scratch) {
  const std::size_t words = table.words();
  const Residue lp = table.params().modulus();
  // Ascending coordinate order; equal residues share a row.
  std::vector<Residue> order(coords.begin(), coords.end());
  std::sort(order.begin(), order.end());
  acc.assign(words, ~Word{0});
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && order[i] == order[i - 1]) continue;
    const auto row = table.row(order[i], scratch);
    Word any = 0;
    for (std::size_t w = 0; w < words; ++w) any |= (acc[w] &= row[w]);
    if (!any) return lp;
  }
  for (std::size_t w = 0; w < words; ++w) {
    if (acc[w]) return static_cast<Residue>(w * 64 + std::countr_zero(acc[w]));
  }
  return lp;
}

ProperVerdict is_proper(std::span<const Residue> coords, const WitnessTable& table) {
  const Residue l = table.params().l();
  if (auto i = gcd_omission(coords, l)) return {ProperVerdict::Kind::ByGcd, static_cast<Residue>(*i)};
  std::vector<Word> acc, scratch;
  const Residue a = smallest_witness(coords, table, acc, scratch);
  if (a < table.params().modulus()) return {ProperVerdict::Kind::ByWitness, a};
  return ProperVerdict::improper();
}

ProperVerdict is_proper(const SpeedTuple& v) {
  if (auto i = gcd_omission(v.coords, v.params.l())) {
    return {ProperVerdict::Kind::ByGcd, static_cast<Residue>(*i)};
  }
  NumeratorSet acc(v.params.modulus());
  std::vector<Word> row(words_for(v.params.modulus()));
  std::vector<Residue> order = v.coords;
  std::sort(order.begin(), order.end());
  for (Residue c : order) {
    fill_admissible_row(c, v.params, row);
    acc.intersect(row);
    if (acc.empty()) return ProperVerdict::improper();
  }
  return {ProperVerdict::Kind::ByWitness, acc.first()};
}

namespace {

// Reduced nonnegative fraction num/den.
struct Fraction {
  Wide num;
  Wide den;

  static Fraction make(Wide n, Wide d) {
    const Wide g = std::gcd(n, d);
    return {n / g, d / g};
  }
  friend bool operator>=(const Fraction& x, const Fraction& y) {
    return static_cast<unsigned __int128>(x.num) * y.den >= static_cast<unsigned __int128>(y.num) * x.den;
  }
};

// ||x|| for x = frac(n / d) in [0, 1).
Fraction distance_to_integer(Wide n, Wide d) {
  const Fraction x = Fraction::make(n % d, d);
  const Fraction mirror = Fraction::make(x.den - x.num, x.den);
  return x.num * mirror.den <= mirror.num * x.den ? x : mirror;
}

}  // namespace

bool witness_certificate_check(std::span<const Residue> coords, int k, Residue lp, Residue a) {
  if (a >= lp) return false;
  const Fraction threshold = Fraction::make(1, static_cast<Wide>(k) + 1);
  for (Residue v : coords) {
    // t * v = (a * v) / lp exactly.
    if (!(distance_to_integer(Wide{a} * v, lp) >= threshold)) return false;
  }
  return true;
}

bool witness_certificate_check(const SpeedTuple& v, Residue a) {
  return witness_certificate_check(v.coords, v.params.k(), v.params.modulus(), a);
}

}  // namespace lrc
