#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kd {

namespace detail {
inline std::atomic<int>& job_setting() {
    static std::atomic<int> jobs{1};
    return jobs;
}
} // namespace detail

/// Worker count used by every per-piece loop. Results never depend on it.
inline int jobs() { return detail::job_setting().load(); }
inline void set_jobs(int n) { detail::job_setting().store(std::max(1, n)); }

/**
 * Runs f(i) for i in [0, n). Work is handed out by an atomic counter; callers write into
 * pre-sized slots, so output order is fixed regardless of the schedule.
 */
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs()), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace kd
