#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace sf {

inline int default_thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition of [0, n) over `threads` workers. The assignment
// depends only on n and the thread count, so per-worker results can be
// merged in worker-index order for a deterministic reduction.
inline void parallel_for(int n, int threads,
                         const std::function<void(int begin, int end, int worker)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads <= 1) {
        if (n > 0) fn(0, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    int chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        int begin = w * chunk;
        int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end, w);
    }
    for (auto& t : pool) t.join();
}

}  // namespace sf
