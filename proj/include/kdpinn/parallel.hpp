// SPDX-License-Identifier: Apache-2.0
//
// Deterministic chunked parallelism. Work is split into fixed-size chunks
// (independent of thread count); each chunk produces a partial result in
// its own slot, and partials are combined serially in chunk order. The
// result is therefore bitwise identical for any thread count, and the
// serial path (threads = 1) doubles as the reference implementation.

#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef KDPINN_HAS_OPENMP
#include <omp.h>
#endif

namespace kdpinn {

inline constexpr std::size_t kReductionChunk = 64;

/// Worker count: KDPINN_THREADS when set, else the OpenMP default,
/// else 1 in serial builds.
inline int worker_count() {
  if (const char* env = std::getenv("KDPINN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
#ifdef KDPINN_HAS_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs chunk_fn(begin, end, partials[c]) for each chunk c of [0, n), in
/// parallel when requested, then folds the partials in ascending chunk
/// order with combine(acc, partial).
template <class Partial, class ChunkFn, class CombineFn>
void chunked_reduce(std::size_t n, ChunkFn&& chunk_fn, Partial& acc,
                    CombineFn&& combine, bool parallel) {
  if (n == 0) return;
  const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<Partial> partials(n_chunks);

#ifdef KDPINN_HAS_OPENMP
  const bool run_parallel = parallel && worker_count() > 1 && n_chunks > 1;
#else
  const bool run_parallel = false;
  (void)parallel;
#endif

  if (run_parallel) {
#ifdef KDPINN_HAS_OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long c = 0; c < static_cast<long long>(n_chunks); ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
      const std::size_t end = std::min(begin + kReductionChunk, n);
      chunk_fn(begin, end, partials[static_cast<std::size_t>(c)]);
    }
#endif
  } else {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t begin = c * kReductionChunk;
      const std::size_t end = std::min(begin + kReductionChunk, n);
      chunk_fn(begin, end, partials[c]);
    }
  }

  for (std::size_t c = 0; c < n_chunks; ++c) combine(acc, partials[c]);
}

/// Parallel loop over [0, n) with no reduction; iterations must touch
/// disjoint data.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, bool parallel) {
#ifdef KDPINN_HAS_OPENMP
  if (parallel && worker_count() > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)parallel;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace kdpinn
