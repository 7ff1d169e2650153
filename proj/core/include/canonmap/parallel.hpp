#pragma once

#include <cstddef>
#include <functional>

namespace canonmap {

// Worker count: CANONMAP_THREADS if set and > 0, otherwise hardware concurrency.
unsigned worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the worker count, and every index is visited exactly
// once, so callers writing to per-index slots get deterministic output.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  unsigned workers = 0);

}  // namespace canonmap
