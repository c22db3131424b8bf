#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace deepmap {

// Runs fn(i) for i in [0, n). With threads <= 1 (or tiny n) it degenerates to
// a plain loop. Work items must write to disjoint slots; chunk boundaries are
// deterministic, so results never depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn &&fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += workers)
                fn(i);
        });
    }
    for (auto &th : pool)
        th.join();
}

inline int default_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace deepmap
