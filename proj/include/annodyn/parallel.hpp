#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace annodyn {

/// Run fn(i) for i in [0, n). Work is split into contiguous index ranges,
/// one per worker. Callers must make fn(i) write only to slot i of
/// preallocated output, so results are identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    std::size_t workers = threads <= 1 ? 1 : std::min<std::size_t>((std::size_t)threads, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace annodyn
