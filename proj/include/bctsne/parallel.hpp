#ifndef BCTSNE_PARALLEL_HPP
#define BCTSNE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

/**
 * @file parallel.hpp
 *
 * @brief Row-block parallelism with a process-wide thread cap.
 */

namespace bctsne {

/**
 * Number of worker threads to use.
 * Defaults to the hardware concurrency, capped by the `BCTSNE_THREADS` environment variable when set.
 */
inline std::size_t worker_threads() {
    std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BCTSNE_THREADS")) {
        try {
            long cap = std::stol(env);
            if (cap >= 1) {
                return std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
            }
        } catch (const std::exception&) {
        }
    }
    return hw;
}

/**
 * Splits `[0, n)` into contiguous blocks and calls `fun(begin, end)` on each,
 * one block per thread. Blocks only write to their own rows, so results do not
 * depend on the thread count as long as `fun` has no cross-row reductions.
 */
template<class Function>
void parallel_rows(std::size_t n, Function fun, std::size_t nthreads = worker_threads()) {
    nthreads = std::max<std::size_t>(1, std::min(nthreads, n / 64 + 1));
    if (nthreads == 1) {
        fun(std::size_t{0}, n);
        return;
    }

    std::vector<std::exception_ptr> errors(nthreads);
    std::vector<std::jthread> workers;
    workers.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t begin = std::min(n, t * chunk), end = std::min(n, begin + chunk);
        workers.emplace_back([&, t, begin, end]() {
            try {
                fun(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    workers.clear();

    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}

#endif
