// parallel.hpp
// Chunked parallel map with a deterministic, chunk-ordered result.

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lrc {

/// Runs body(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
/// Chunks are claimed dynamically by up to `threads` workers; chunk boundaries
/// depend only on n and chunk, so per-chunk outputs can be merged in order.
template <typename Body>
void parallel_chunks(std::size_t n, std::size_t chunk, unsigned threads, Body&& body) {
  if (n == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), chunks));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&] {
    try {
      for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
        body(c, c * chunk, std::min(n, (c + 1) * chunk));
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = chunks;
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);
}

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) { return n == 0 ? 0 : (n + chunk - 1) / chunk; }

}  // namespace lrc
