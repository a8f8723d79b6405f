#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace spdestab {

/// Runs job(i) for i in [0, count) on up to `jobs` threads. Results come back
/// indexed by i, so downstream reductions see the same order for any `jobs`.
template <class Job>
auto parallel_map(std::size_t count, unsigned jobs, Job&& job) -> std::vector<std::invoke_result_t<Job&, std::size_t>> {
    using R = std::invoke_result_t<Job&, std::size_t>;
    std::vector<R> out(count);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = job(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace spdestab
