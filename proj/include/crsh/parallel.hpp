#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace crsh {

/// Worker count for the data-parallel stages. Every stage partitions its
/// index range statically and writes disjoint outputs, so results never
/// depend on the worker count.
struct Executor {
    unsigned threads = default_threads();

    static unsigned default_threads()
    {
        return std::max(1u, std::thread::hardware_concurrency());
    }
};

/// Number of contiguous blocks `n` items are split into.
inline std::size_t block_count(const Executor& ex, std::size_t n, std::size_t grain = 4096)
{
    if (n == 0) {
        return 0;
    }
    const std::size_t by_grain = (n + grain - 1) / grain;
    return std::max<std::size_t>(1, std::min<std::size_t>(ex.threads, by_grain));
}

/// Calls fn(block, begin, end) for `blocks` contiguous ranges covering [0, n).
template <class Fn>
void for_each_block(const Executor& ex, std::size_t n, std::size_t blocks, Fn&& fn)
{
    if (blocks == 0) {
        return;
    }
    auto range = [n, blocks](std::size_t b) {
        return std::pair{n * b / blocks, n * (b + 1) / blocks};
    };
    if (blocks == 1 || ex.threads <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto [lo, hi] = range(b);
            fn(b, lo, hi);
        }
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(blocks - 1);
    for (std::size_t b = 1; b < blocks; ++b) {
        workers.emplace_back([&fn, &range, b] {
            const auto [lo, hi] = range(b);
            fn(b, lo, hi);
        });
    }
    const auto [lo, hi] = range(0);
    fn(0, lo, hi);
}

/// Calls fn(i) for every i in [0, n).
template <class Fn>
void parallel_for(const Executor& ex, std::size_t n, Fn&& fn, std::size_t grain = 1024)
{
    for_each_block(ex, n, block_count(ex, n, grain), [&fn](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            fn(i);
        }
    });
}

} // namespace crsh
