#pragma once

// Replica-parallel map with deterministic output: workers pull replica
// indices from a shared counter, but results land in a vector slot keyed by
// replica index and all aggregation happens afterwards in index order, so the
// outcome is bit-identical for any thread count or scheduling.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace opcwalk {

template <typename Result, typename Fn>
std::vector<Result> replica_map(std::size_t count, int threads, Fn&& fn) {
    std::vector<Result> results(count);
    if (count == 0) return results;
    int workers = threads < 1 ? 1 : threads;
    if (static_cast<std::size_t>(workers) > count) workers = static_cast<int>(count);

    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

}  // namespace opcwalk
