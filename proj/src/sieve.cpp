// sieve.cpp
// S1 is sharded by v2. Within a shard the coordinates are 1, v2 and k - 2
// more from [v2, (p-1)/2].
//
// A canonical tuple with second coordinate v2 has fold(v_j / v_i) >= v2 for
// every pair i != j (scaling by v_i^-1 stays in the orbit), so each chosen
// coordinate x rules out the values y = +-x t and y = +-x / t for 1 <= t < v2.
//
// The default search is driven by coverage. It keeps the set T of times a/p,
// 1 <= a <= (p-1)/2, still admissible for the chosen coordinates, picks the
// time in T ruled out by the fewest usable speeds and branches on those
// speeds. A speed tried in one branch is dropped from its later siblings, so
// every multiset is reached once. Each speed rules out the same number M of
// times, so a node with r coordinates to go and more than r M times left is
// dead; the last coordinate is the intersection of the cover sets of T.
//
// The plain search enumerates nondecreasing tuples with only the ratio
// blocking and tests each leaf. It is kept as a cross-check.

#include "lrc/sieve.hpp"

#include <algorithm>
#include <bit>

#include "lrc/parallel.hpp"
#include "lrc/witness.hpp"

namespace lrc {

namespace {

inline bool test_bit(const Word* bits, std::size_t i) { return (bits[i / 64] >> (i % 64)) & 1; }
inline void set_bit(Word* bits, std::size_t i) { bits[i / 64] |= Word{1} << (i % 64); }
inline void clear_bit(Word* bits, std::size_t i) { bits[i / 64] &= ~(Word{1} << (i % 64)); }

template <class F>
void for_each_bit(const Word* bits, std::size_t words, F&& f) {
  for (std::size_t w = 0; w < words; ++w) {
    for (Word b = bits[w]; b; b &= b - 1) f(static_cast<Residue>(w * 64 + static_cast<std::size_t>(std::countr_zero(b))));
  }
}

// Bitsets over [0, half]. rows[y] holds the admissible numerators of speed y,
// cover[a] the speeds that rule a out.
struct SieveTables {
  Residue p = 0;
  Residue half = 0;
  std::size_t words = 0;
  std::vector<Word> rows;
  std::vector<Word> cover;
  std::vector<Word> kills;
  std::vector<Residue> fold_product;  // fold(x t mod p) at x (half + 1) + t
  std::vector<Residue> fold_inverse;  // fold(t^-1 mod p)
  std::size_t ruled_out = 0;           // times each speed rules out

  explicit SieveTables(const AnsatzParams& params) : p(params.p()), half((params.p() - 1) / 2) {
    words = words_for(half + 1);
    rows.assign((half + 1) * words, 0);
    cover.assign((half + 1) * words, 0);
    kills.assign((half + 1) * words, 0);
    for (Residue y = 1; y <= half; ++y) {
      for (Residue a = 1; a <= half; ++a) {
        if (norm_ok(a, y, params)) {
          set_bit(rows.data() + y * words, a);
        } else {
          set_bit(cover.data() + a * words, y);
          set_bit(kills.data() + y * words, a);
        }
      }
    }
    fold_product.assign((half + 1) * (half + 1), 0);
    for (Residue x = 1; x <= half; ++x) {
      for (Residue t = 1; t <= half; ++t) fold_product[x * (half + 1) + t] = fold(static_cast<Residue>(Wide{x} * t % p), p);
    }
    // A unit permutes the times up to sign, so every speed rules out as many
    // of them as the speed 1 does.
    for (Residue a = 1; a <= half; ++a) ruled_out += norm_ok(a, 1, params) ? 0 : 1;
    fold_inverse.assign(half + 1, 0);
    for (Residue t = 1; t <= half; ++t) fold_inverse[t] = fold(mod_inverse(t, p), p);
  }

  const Word* row(Residue y) const { return rows.data() + y * words; }
  const Word* covers(Residue a) const { return cover.data() + a * words; }
  const Word* killed_by(Residue y) const { return kills.data() + y * words; }
};

// Per-shard state shared by both searches: chosen coordinates and, for every
// x, the set of values a canonical tuple cannot hold next to x.
class ShardBase {
 protected:
  ShardBase(const SieveTables& tables, int k, Residue v2)
      : t_(tables),
        k_(static_cast<std::size_t>(k)),
        words_(tables.words),
        p_(tables.p),
        half_(tables.half),
        v2_(v2),
        coords_(k_),
        blocks_((half_ + 1) * words_, 0) {
    const std::size_t stride = half_ + 1;
    for (Residue x = 1; x <= half_; ++x) {
      Word* b = blocks_.data() + x * words_;
      for (Residue t = 1; t < v2; ++t) {
        set_bit(b, t_.fold_product[x * stride + t]);
        set_bit(b, t_.fold_product[x * stride + t_.fold_inverse[t]]);
      }
    }
  }

  const Word* blocks(Residue x) const { return blocks_.data() + x * words_; }

  const SieveTables& t_;
  std::size_t k_;
  std::size_t words_;
  Residue p_;
  Residue half_;
  Residue v2_;
  std::vector<Residue> coords_;
  std::vector<Word> blocks_;
  std::vector<Residue> out_;
};

class CoverSearch : ShardBase {
 public:
  CoverSearch(const SieveTables& tables, int k, Residue v2)
      : ShardBase(tables, k, v2),
        times_((k_ + 1) * words_, 0),
        usable_((k_ + 1) * words_, 0),
        branch_((k_ + 1) * words_, 0),
        packing_((k_ + 1) * (k_ + 1) * words_, 0),
        sorted_(k_) {}

  void run() {
    if (test_bit(blocks(1), v2_)) return;
    Word* u = usable(2);
    for (Residue y = v2_; y <= half_; ++y) set_bit(u, y);
    const Word* b1 = blocks(1);
    const Word* b2 = blocks(v2_);
    for (std::size_t w = 0; w < words_; ++w) u[w] &= ~(b1[w] | b2[w]);
    Word* t = times(2);
    const Word* r1 = t_.row(1);
    const Word* r2 = t_.row(v2_);
    for (std::size_t w = 0; w < words_; ++w) t[w] = r1[w] & r2[w];
    coords_[0] = 1;
    coords_[1] = v2_;
    if (k_ == 2) {
      if (empty(2)) leaf();
      return;
    }
    search(2);
  }

  std::vector<Residue>& output() { return out_; }

 private:
  Word* times(std::size_t depth) { return times_.data() + depth * words_; }
  Word* usable(std::size_t depth) { return usable_.data() + depth * words_; }
  Word* branch(std::size_t depth) { return branch_.data() + depth * words_; }
  Word* packing(std::size_t depth) { return packing_.data() + depth * (k_ + 1) * words_; }

  bool empty(std::size_t depth) {
    const Word* bits = times(depth);
    for (std::size_t w = 0; w < words_; ++w) {
      if (bits[w]) return false;
    }
    return true;
  }

  // Descends into y: the child keeps the times y admits and drops the values
  // y blocks.
  // Returns the number of times left for the child.
  std::size_t step(std::size_t depth, Residue y, const Word* u) {
    const Word* row = t_.row(y);
    const Word* b = blocks(y);
    const Word* src = times(depth);
    Word* dst = times(depth + 1);
    Word* cu = usable(depth + 1);
    std::size_t count = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      dst[w] = src[w] & row[w];
      cu[w] = u[w] & ~b[w];
      count += static_cast<std::size_t>(std::popcount(dst[w]));
    }
    return count;
  }

  void search(std::size_t depth) {
    const std::size_t left = k_ - depth;
    Word* u = usable(depth);
    if (empty(depth)) {
      complete(depth, v2_);
      return;
    }
    const Word* alive = times(depth);

    if (left == 1) {
      // The last coordinate must rule out every remaining time.
      Word* cand = branch(depth);
      std::copy_n(u, words_, cand);
      for (std::size_t w = 0; w < words_; ++w) {
        for (Word bits = alive[w]; bits; bits &= bits - 1) {
          const Word* c = t_.covers(static_cast<Residue>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
          Word any = 0;
          for (std::size_t i = 0; i < words_; ++i) any |= (cand[i] &= c[i]);
          if (!any) return;
        }
      }
      for_each_bit(cand, words_, [&](Residue y) {
        coords_[depth] = y;
        leaf();
      });
      return;
    }

    std::size_t count = 0;
    for (std::size_t w = 0; w < words_; ++w) count += static_cast<std::size_t>(std::popcount(alive[w]));
    if (count > left * t_.ruled_out) return;
    if (left == 2) {
      std::size_t best = 0, second = 0;
      for_each_bit(u, words_, [&](Residue y) {
        const Word* kill = t_.killed_by(y);
        std::size_t n = 0;
        for (std::size_t i = 0; i < words_; ++i) n += static_cast<std::size_t>(std::popcount(kill[i] & alive[i]));
        if (n > best) {
          second = best;
          best = n;
        } else if (n > second) {
          second = n;
        }
      });
      if (best + second < count) return;
    }

    // The most constrained remaining time.
    Residue pick = 0;
    int fewest = -1;
    for (std::size_t w = 0; w < words_ && fewest != 0; ++w) {
      for (Word bits = alive[w]; bits; bits &= bits - 1) {
        const auto a = static_cast<Residue>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        const Word* c = t_.covers(a);
        int n = 0;
        for (std::size_t i = 0; i < words_; ++i) n += std::popcount(c[i] & u[i]);
        if (fewest < 0 || n < fewest) {
          fewest = n;
          pick = a;
          if (n == 0) break;
        }
      }
    }
    if (fewest <= 0) return;

    Word* br = branch(depth);
    const Word* c = t_.covers(pick);
    for (std::size_t i = 0; i < words_; ++i) br[i] = c[i] & u[i];
    for_each_bit(br, words_, [&](Residue y) {
      coords_[depth] = y;
      if (step(depth, y, u) <= (left - 1) * t_.ruled_out) search(depth + 1);
      clear_bit(u, y);
    });
  }

  // No time is left: every completion from the usable speeds is improper.
  void complete(std::size_t depth, Residue min_value) {
    if (depth == k_) {
      leaf();
      return;
    }
    const Word* u = usable(depth);
    for (Residue y = min_value; y <= half_; ++y) {
      if (!test_bit(u, y)) continue;
      coords_[depth] = y;
      Word* cu = usable(depth + 1);
      const Word* b = blocks(y);
      for (std::size_t w = 0; w < words_; ++w) cu[w] = u[w] & ~b[w];
      complete(depth + 1, y);
    }
  }

  void leaf() {
    std::copy(coords_.begin(), coords_.end(), sorted_.begin());
    std::sort(sorted_.begin() + 2, sorted_.end());
    if (is_canonical(sorted_, p_)) out_.insert(out_.end(), sorted_.begin(), sorted_.end());
  }

  std::vector<Word> times_;
  std::vector<Word> usable_;
  std::vector<Word> branch_;
  std::vector<Word> packing_;
  std::vector<Residue> sorted_;
};

class PlainSearch : ShardBase {
 public:
  PlainSearch(const SieveTables& tables, int k, Residue v2) : ShardBase(tables, k, v2), usable_((k_ + 1) * words_, 0) {}

  void run() {
    if (test_bit(blocks(1), v2_)) return;
    Word* u = usable(2);
    for (Residue y = v2_; y <= half_; ++y) set_bit(u, y);
    for (std::size_t w = 0; w < words_; ++w) u[w] &= ~(blocks(1)[w] | blocks(v2_)[w]);
    coords_[0] = 1;
    coords_[1] = v2_;
    descend(2, v2_);
  }

  std::vector<Residue>& output() { return out_; }

 private:
  Word* usable(std::size_t depth) { return usable_.data() + depth * words_; }

  void descend(std::size_t depth, Residue min_value) {
    if (depth == k_) {
      leaf();
      return;
    }
    const Word* u = usable(depth);
    for (Residue v = min_value; v <= half_; ++v) {
      if (!test_bit(u, v)) continue;
      coords_[depth] = v;
      Word* cu = usable(depth + 1);
      for (std::size_t w = 0; w < words_; ++w) cu[w] = u[w] & ~blocks(v)[w];
      descend(depth + 1, v);
    }
  }

  void leaf() {
    for (Residue a = 1; a <= half_; ++a) {
      bool witness = true;
      for (Residue v : coords_) {
        if (!test_bit(t_.row(v), a)) {
          witness = false;
          break;
        }
      }
      if (witness) return;
    }
    if (is_canonical(coords_, p_)) out_.insert(out_.end(), coords_.begin(), coords_.end());
  }

  std::vector<Word> usable_;
};

}  // namespace

TupleSet sieve_initial(int k, Residue p, const SieveOptions& options) {
  const AnsatzParams params(k, p, 1);
  if (p < 3) throw Error(ErrorCode::InvalidParams, "sieve requires an odd prime, got " + std::to_string(p));
  const SieveTables tables(params);
  const Residue half = (p - 1) / 2;

  std::vector<std::vector<Residue>> shard_out(half);
  parallel_chunks(half, 1, options.threads, [&](std::size_t shard, std::size_t, std::size_t) {
    const auto v2 = static_cast<Residue>(shard + 1);
    if (options.prefix_shortcut) {
      CoverSearch search(tables, k, v2);
      search.run();
      shard_out[shard] = std::move(search.output());
    } else {
      PlainSearch search(tables, k, v2);
      search.run();
      shard_out[shard] = std::move(search.output());
    }
  });

  std::vector<Residue> flat;
  for (auto& s : shard_out) flat.insert(flat.end(), s.begin(), s.end());
  return TupleSet::from_flat(params, "S1", std::move(flat));
}

}  // namespace lrc
