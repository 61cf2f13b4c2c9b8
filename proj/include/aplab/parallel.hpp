#pragma once

#include <cstdint>
#include <functional>

namespace aplab {

int thread_count();
void set_thread_count(int n);

/// Runs fn(chunk, begin, end) over a contiguous partition of [0, n).
/// Results must be merged by the caller in chunk order; every per-chunk
/// computation here is independent of the partition, so outputs do not
/// depend on the configured thread count.
void parallel_chunks(std::int64_t n,
                     const std::function<void(int chunk, std::int64_t begin, std::int64_t end)>& fn);

int num_chunks(std::int64_t n);

}  // namespace aplab
