#include "parallel.hpp"

#include <algorithm>

namespace mfg {

namespace {
int g_threads = 1;
}

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

void parallel_chunks(std::size_t total, std::size_t grain,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (total == 0) return;
    grain = std::max<std::size_t>(1, grain);
    const std::size_t n_chunks = (total + grain - 1) / grain;
    const int workers = std::min<std::size_t>(thread_count(), n_chunks);

    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * grain, std::min(total, (c + 1) * grain));
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                fn(c, c * grain, std::min(total, (c + 1) * grain));
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace mfg
