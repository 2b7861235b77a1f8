// sieve.hpp
// The initial improper set I(k,p,1), restricted to canonical representatives.

#pragma once

#include "lrc/tuple_set.hpp"

namespace lrc {

struct SieveOptions {
  unsigned threads = 1;
  /// Coverage-driven search: prefixes whose admissible times are exhausted
  /// emit all completions at once, and prefixes that cannot exhaust them are
  /// cut. Disabling it enumerates every leaf that passes the ratio pruning
  /// (which is exact) and tests it directly.
  bool prefix_shortcut = true;
};

/// All canonical tuples 1 = v1 <= ... <= vk <= (p-1)/2 that are improper at
/// l = 1. Throws on invalid (k, p); p must be an odd prime.
TupleSet sieve_initial(int k, Residue p, const SieveOptions& options = {});

}  // namespace lrc
