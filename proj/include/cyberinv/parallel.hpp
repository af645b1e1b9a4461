#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cyberinv {

/// Process-wide cap on worker threads (0 = hardware concurrency).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(chunk_index, begin, end) over [0, n) split into fixed-size
/// chunks. Chunk boundaries depend only on n and chunk_size, never on the
/// thread count, so per-chunk partial results merged in chunk order are
/// reproducible.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t chunk_size, Body&& body) {
    if (n == 0) {
        return;
    }
    chunk_size = std::max<std::size_t>(chunk_size, 1);
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(max_threads(), n_chunks));

    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * chunk_size;
        body(c, begin, std::min(n, begin + chunk_size));
    };
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            run_chunk(c);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                try {
                    run_chunk(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace cyberinv
