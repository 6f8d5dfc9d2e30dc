#pragma once

// Runs fn(0..n-1) on a pool of worker threads. Work items must be
// independent; results go into caller-owned slots indexed by i, so output
// does not depend on the number of workers.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qwo {

inline std::size_t& default_jobs() {
    static std::size_t jobs = std::max(1U, std::thread::hardware_concurrency());
    return jobs;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t jobs = default_jobs()) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next.store(n);
                        return;
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace qwo
