#pragma once

#include <cstdint>
#include <functional>

namespace mvf {

// Global cap on worker threads used by parallel_for. Defaults to the
// hardware concurrency. All parallel loops in this library write to
// disjoint output slots and run reductions serially afterwards, so
// results are bitwise identical for any thread count.
void set_max_threads(int n);
int max_threads();

// Statically chunked parallel loop over [begin, end). The callable is
// invoked once per index. Falls back to a serial loop when the range is
// small or only one thread is allowed.
void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t)>& fn);

}  // namespace mvf
