#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sysrisk {

// Runs fn(i) for i in [0, n) over `threads` workers with a static block
// partition. Callers write to preallocated index-addressed slots, so results
// do not depend on scheduling. The first exception thrown by any worker is
// rethrown after all workers join.
inline void parallel_for(int n, int threads,
                         const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (threads < 1) threads = 1;
    if (threads > n) threads = n;
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    int chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        int lo = w * chunk;
        int hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace sysrisk
