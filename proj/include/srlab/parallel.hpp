// parallel.hpp: Index-slotted parallel map used for grid sweeps
//
// Tasks are claimed dynamically from a shared counter and each result is written
// to the slot of its grid index, so the assembled output never depends on the
// worker count or on scheduling order.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace srlab {

template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, int workers, Fn&& fn) {
    std::vector<Result> out(count);
    const std::size_t n_workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(count, 1));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        out[i] = fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

// Worker count from SRLAB_WORKERS, falling back to the hardware concurrency.
inline int default_workers() {
    if (const char* env = std::getenv("SRLAB_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

} // namespace srlab
