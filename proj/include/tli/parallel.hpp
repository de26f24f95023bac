#ifndef TLI_PARALLEL_HPP
#define TLI_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tli {

inline int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Split [0, n) into one contiguous chunk per worker and run body(lo, hi,
// chunk_index).  Workers write disjoint ranges, so the result does not
// depend on the thread count.
template <typename F>
void parallel_chunks(std::int64_t n, int threads, F&& body) {
    if (n <= 0) return;
    int use = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, n)));
    if (use == 1) {
        body(std::int64_t{0}, n, 0);
        return;
    }
    const std::int64_t per = (n + use - 1) / use;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(use - 1));
    for (int c = 1; c < use; ++c) {
        const std::int64_t lo = c * per;
        const std::int64_t hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi, c] { body(lo, hi, c); });
    }
    body(std::int64_t{0}, std::min(per, n), 0);
    for (auto& th : pool) th.join();
}

// Run job(i) for i in [0, n) on a bounded worker pool.  Job order is not
// deterministic but jobs must be independent; the first exception (if any)
// is rethrown after all workers drain.
template <typename F>
void parallel_jobs(std::int64_t n, int workers, F&& job) {
    if (n <= 0) return;
    workers = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(workers, n)));
    if (workers == 1) {
        for (std::int64_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tli

#endif
