#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace biasprobe {

/// Run fn(i) for i in [0, n) on up to n_threads workers. Work items must be
/// independent; any exception is rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t n_threads, Fn&& fn) {
    if (n_threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const std::size_t k = std::min(n_threads, n);
    threads.reserve(k);
    for (std::size_t t = 0; t < k; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace biasprobe
