#pragma once

// Deterministic index-sharded parallel map. Worker count comes from the
// KNOTLAT_WORKERS environment variable (default: hardware concurrency).
// Results must be written into per-index slots by the callee, so output is
// bitwise independent of worker count and scheduling.

#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#include "knotlat/errors.hpp"

namespace knotlat {

inline int worker_count() {
    if (const char* env = std::getenv("KNOTLAT_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1 || n > 4096)
            throw ConfigError("KNOTLAT_WORKERS must be an integer in [1, 4096]");
        return static_cast<int>(n);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [0, n). Worker t takes the stride class i = t (mod W).
// All indices are attempted even if some throw; the exception with the
// smallest index is rethrown so failures are reproducible.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int workers = -1) {
    if (n == 0) return;
    int w = workers > 0 ? workers : worker_count();
    if (w > static_cast<int>(n)) w = static_cast<int>(n);
    if (w <= 1) {
        std::exception_ptr first;
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                if (!first) first = std::current_exception();
            }
        }
        if (first) std::rethrow_exception(first);
        return;
    }

    std::vector<std::exception_ptr> errs(n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = static_cast<std::size_t>(t); i < n;
                 i += static_cast<std::size_t>(w)) {
                try {
                    fn(i);
                } catch (...) {
                    errs[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < n; ++i)
        if (errs[i]) std::rethrow_exception(errs[i]);
}

} // namespace knotlat
