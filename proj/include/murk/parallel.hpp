#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace murk {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(begin, end, chunk_index) over contiguous chunks of [0, count).
// Chunk boundaries depend only on (count, threads); callers own the
// determinism of what happens inside a chunk.
template <typename Fn>
void parallel_chunks(int count, int threads, Fn&& fn) {
    threads = std::clamp(threads, 1, std::max(count, 1));
    if (threads <= 1) {
        fn(0, count, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int base = count / threads;
    const int extra = count % threads;
    int begin = 0;
    for (int c = 0; c < threads; ++c) {
        const int len = base + (c < extra ? 1 : 0);
        const int end = begin + len;
        pool.emplace_back([&fn, begin, end, c] { fn(begin, end, c); });
        begin = end;
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace murk
