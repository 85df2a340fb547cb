#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace adact {

// Worker cap: ADACT_THREADS env var when set, else hardware concurrency.
inline unsigned thread_budget() {
    if (const char* s = std::getenv("ADACT_THREADS")) {
        long n = std::strtol(s, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Patterns per work unit. The chunk layout depends only on the problem size,
// never on the worker count, so per-chunk partial results and their in-order
// combination are bit-identical for any ADACT_THREADS setting.
inline constexpr std::size_t kChunkSize = 1024;

// Runs fn(begin, end, chunk_index) over [0, n) split into fixed chunks.
// fn must only write to chunk-owned state and must not throw.
template <typename Fn>
void for_each_chunk(std::size_t n, Fn&& fn) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_budget(), n_chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize), c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize), c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

// Chunked reduction with a fixed combine order. per_chunk(begin, end) builds
// one partial; combine(acc, partial) folds them in chunk order.
template <typename T, typename PerChunk, typename Combine>
T chunked_reduce(std::size_t n, T init, PerChunk&& per_chunk, Combine&& combine) {
    if (n == 0) return init;
    const std::size_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
    std::vector<T> parts(n_chunks, init);
    for_each_chunk(n, [&](std::size_t b, std::size_t e, std::size_t c) {
        parts[c] = per_chunk(b, e);
    });
    T acc = init;
    for (std::size_t c = 0; c < n_chunks; ++c) acc = combine(std::move(acc), parts[c]);
    return acc;
}

}  // namespace adact
