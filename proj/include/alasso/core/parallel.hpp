#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace alasso {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items are
/// claimed dynamically, so callers must write results into slot i and never
/// depend on execution order. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body)
{
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

} // namespace alasso
