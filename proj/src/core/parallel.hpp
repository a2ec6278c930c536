#ifndef EPF_CORE_PARALLEL_HPP
#define EPF_CORE_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace epf
{

/// Runs body(i) for i in [0, n). With jobs <= 1 the loop is serial; otherwise
/// a pool of `jobs` threads pulls indices from a shared counter. Each index is
/// processed exactly once and results must be written by index on the caller
/// side, so output is identical for every jobs value.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& body)
{
    if (n <= 0) {
        return;
    }
    if (jobs <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                body(i);
            }
            catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    int threads = std::min(jobs, n);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int k = 0; k < threads; ++k) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace epf

#endif // EPF_CORE_PARALLEL_HPP
