#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace tremor {

// Worker cap: TREMOR_BENCH_THREADS, 0 or unset means hardware concurrency.
inline unsigned thread_budget() {
    unsigned budget = 0;
    if (const char* env = std::getenv("TREMOR_BENCH_THREADS")) {
        budget = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (budget == 0) {
        budget = std::thread::hardware_concurrency();
    }
    return budget == 0 ? 1u : budget;
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

// Runs fn(i) for i in [0, n). Work items must write results keyed by their own
// index so the aggregate is identical for any thread count. Nested calls run
// sequentially to avoid oversubscription.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned budget = thread_budget();
    if (n == 0) {
        return;
    }
    if (budget <= 1 || n == 1 || detail::inside_parallel_region) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(budget, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            detail::inside_parallel_region = true;
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace tremor
