// witness.hpp
// Properness of a speed tuple inside one ansatz: witness times in (1/lp)Z
// found by intersecting per-speed admissible numerator sets, plus the gcd
// condition.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrc/core.hpp"

namespace lrc {

using Word = std::uint64_t;

inline std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

/// Bit a set means time a/(lp) is admissible for every speed applied so far.
class NumeratorSet {
 public:
  NumeratorSet() = default;
  /// All bits set (no speed applied yet).
  explicit NumeratorSet(Residue denominator);

  Residue denominator() const noexcept { return denominator_; }
  bool test(Residue a) const { return (bits_[a >> 6] >> (a & 63)) & 1U; }
  void set(Residue a) { bits_[a >> 6] |= Word{1} << (a & 63); }
  void clear_all();
  std::size_t count() const;
  bool empty() const;
  /// Smallest admissible numerator, or denominator() when empty.
  Residue first() const;
  void intersect(std::span<const Word> other);

  std::span<const Word> words() const { return bits_; }
  std::vector<Residue> members() const;

 private:
  Residue denominator_ = 0;
  std::vector<Word> bits_;
};

/// Bit a set iff norm_ok(a, v, params).
NumeratorSet admissible_set(Residue v, const AnsatzParams& params);

/// Admissible sets for every residue of one ansatz, built once and then
/// read-only. Falls back to computing rows on demand when the full table would
/// exceed the memory budget.
class WitnessTable {
 public:
  explicit WitnessTable(const AnsatzParams& params, std::size_t max_table_bytes = std::size_t{512} << 20);

  const AnsatzParams& params() const noexcept { return params_; }
  std::size_t words() const noexcept { return words_; }
  bool cached() const noexcept { return !table_.empty(); }

  /// Row for residue v. Uses scratch when rows are not cached.
  std::span<const Word> row(Residue v, std::vector<Word>& scratch) const;

 private:
  AnsatzParams params_;
  std::size_t words_;
  std::vector<Word> table_;
};

/// Fills out (words_for(lp) words) with the admissible set of v.
void fill_admissible_row(Residue v, const AnsatzParams& params, std::span<Word> out);

struct ProperVerdict {
  enum class Kind { ByGcd, ByWitness, Improper };
  Kind kind;
  /// Omitted index for ByGcd, smallest witness numerator for ByWitness.
  Residue value = 0;

  static ProperVerdict improper() { return {Kind::Improper, 0}; }
  bool is_improper() const { return kind == Kind::Improper; }
  bool operator==(const ProperVerdict&) const = default;
};

/// Witness test only: smallest a with norm_ok(a, v_i) for all i, or lp when
/// none exists. Coordinates are intersected in ascending order with early exit.
Residue smallest_witness(std::span<const Residue> coords, const WitnessTable& table, std::vector<Word>& acc,
                         std::vector<Word>& scratch);

ProperVerdict is_proper(std::span<const Residue> coords, const WitnessTable& table);
ProperVerdict is_proper(const SpeedTuple& v);

/// Independent audit of a witness numerator using exact rational distances;
/// shares no code with the admissible-set path.
bool witness_certificate_check(const SpeedTuple& v, Residue a);
bool witness_certificate_check(std::span<const Residue> coords, int k, Residue lp, Residue a);

}  // namespace lrc
