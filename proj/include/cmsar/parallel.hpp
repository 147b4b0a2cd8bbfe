#pragma once

#include <cstddef>
#include <functional>

namespace cmsar {

// Worker count used when a caller passes 0: CMSAR_WORKERS if set and
// positive, otherwise the hardware concurrency (at least 1).
unsigned resolve_workers(unsigned requested = 0);

// Splits [0, n) into contiguous blocks, one per worker, and calls
// body(begin, end) for each block.  With a single worker the body runs on
// the calling thread.  Exceptions from any block are rethrown.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace cmsar
