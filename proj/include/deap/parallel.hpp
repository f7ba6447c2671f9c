#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace deap {

// Thread cap: DEAP_SIM_THREADS wins if set to a positive integer,
// otherwise the hardware concurrency (at least 1).
inline int max_threads() {
    if (const char* env = std::getenv("DEAP_SIM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Run fn(i) for every i in [0, n) across up to `threads` workers in
// contiguous blocks. Each index must touch only its own output slot, so
// results cannot depend on the thread count or schedule. The first
// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
inline void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
    if (threads <= 0) threads = max_threads();
    if (n == 0) return;
    threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr first_error;
    std::mutex error_mu;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &first_error, &error_mu] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace deap
