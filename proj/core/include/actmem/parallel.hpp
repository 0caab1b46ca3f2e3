#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace actmem {

// Runs fn(i) for i in [0, count) on up to max_parallel threads. Work is
// claimed through a shared atomic counter, so per-item cost imbalance does
// not stall workers. The first exception (by item index) is rethrown after
// all workers drain; results must be written into pre-sized slots by the
// caller, which keeps merge order deterministic regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, int max_parallel, Fn&& fn) {
    if (count == 0) return;
    std::size_t workers = max_parallel < 1 ? 1 : static_cast<std::size_t>(max_parallel);
    if (workers > count) workers = count;
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t first_failed = count;
    std::exception_ptr error;

    auto body = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < first_failed) {
                    first_failed = i;
                    error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace actmem
