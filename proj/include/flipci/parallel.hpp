#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace flipci {

// Runs body(i) for i in [0, n_tasks) across up to `threads` workers.
// Tasks must be independent; results should be written into per-index slots
// so the outcome is identical to the serial order. The first exception is
// rethrown after all workers join.
inline void parallel_for(int n_tasks, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = int(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (threads == 1 || n_tasks <= 1) {
        for (int i = 0; i < n_tasks; ++i) body(i);
        return;
    }

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            int i = next.fetch_add(1);
            if (i >= n_tasks) break;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };

    std::vector<std::thread> pool;
    int n_workers = std::min(threads, n_tasks);
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace flipci
