#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace mfg {

// Process-wide worker count (set from the CLI --threads flag).
void set_thread_count(int n);
int thread_count();

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, total).
// The chunk partition depends only on `total` and `grain`, never on the
// worker count, so per-chunk results (and any reduction done in chunk
// order) are identical for any number of threads.
void parallel_chunks(std::size_t total, std::size_t grain,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

} // namespace mfg
