#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mica::detail {

// Runs fn(i) for i in [0, count) on up to n_workers threads with a static
// stride partition. Results must be written to per-index slots by fn so that
// the outcome is identical for any worker count. The lowest-index exception
// is rethrown after all threads join.
inline void parallel_for_indexed(std::size_t count, int n_workers,
                                 const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t workers = n_workers <= 0
                              ? std::max(1u, std::thread::hardware_concurrency())
                              : static_cast<std::size_t>(n_workers);
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::pair<std::size_t, std::exception_ptr>> errors(workers);
    for (auto& e : errors) e = {count, nullptr};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < count; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    if (!errors[w].second) errors[w] = {i, std::current_exception()};
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    std::exception_ptr first = nullptr;
    std::size_t best = count;
    for (const auto& [idx, err] : errors) {
        if (err && idx < best) {
            best = idx;
            first = err;
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace mica::detail
