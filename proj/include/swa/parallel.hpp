#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace swa {

/// Number of workers to use when the caller passes 0.
inline std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(i) for every i in [0, count) on up to `workers` threads.
///
/// Tasks are claimed dynamically, so the schedule is arbitrary; callers write
/// results into slot i to keep output order independent of it. If any task
/// throws, all remaining tasks still run and the exception from the lowest
/// failing index is rethrown, so error reporting is schedule-independent too.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
    if (count == 0) return;
    if (workers == 0) workers = default_workers();
    workers = std::min(workers, count);

    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (error) std::rethrow_exception(error);
}

} // namespace swa
