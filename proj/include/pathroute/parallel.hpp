#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace pathroute {

// Thread cap from PATHROUTE_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("PATHROUTE_THREADS");
    if (!env || !*env) return hw;
    long v = std::strtol(env, nullptr, 10);
    if (v <= 0) return hw;
    return static_cast<unsigned>(std::min<long>(v, hw));
}

// Splits [0, n) into contiguous chunks, one worker per chunk. Callers must
// keep reductions order-independent (integer sums, per-index writes); result
// then does not depend on the thread count.
inline void parallel_for(size_t n, const std::function<void(size_t, size_t)>& body) {
    unsigned workers = thread_budget();
    if (n == 0) return;
    if (workers <= 1 || n < 2 * workers) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        size_t begin = static_cast<size_t>(w) * chunk;
        if (begin >= n) break;
        size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace pathroute
