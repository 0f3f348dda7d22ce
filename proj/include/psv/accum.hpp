#pragma once

#include <atomic>
#include <cstdlib>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace psv {

/// Neumaier compensated accumulator. Used for all large quadrature sums so
/// that results are reproducible independent of how the work was chunked.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(const std::vector<double>& xs) {
    KahanSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

namespace detail {
inline std::atomic<int>& worker_count_slot() {
    static std::atomic<int> count{0};  // 0 = uninitialized
    return count;
}
}  // namespace detail

/// Worker count for parallel loops. Defaults to the PSV_WORKERS environment
/// variable, falling back to the hardware concurrency.
inline int worker_count() {
    int c = detail::worker_count_slot().load(std::memory_order_relaxed);
    if (c > 0) return c;
    if (const char* env = std::getenv("PSV_WORKERS")) {
        int parsed = std::atoi(env);
        if (parsed > 0) {
            detail::worker_count_slot().store(parsed, std::memory_order_relaxed);
            return parsed;
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    int fallback = hw == 0 ? 1 : static_cast<int>(hw);
    detail::worker_count_slot().store(fallback, std::memory_order_relaxed);
    return fallback;
}

/// count <= 0 resets to the environment/hardware default.
inline void set_worker_count(int count) {
    detail::worker_count_slot().store(count > 0 ? count : 0, std::memory_order_relaxed);
}

/// Runs fn(i) for i in [0, count). Each index must write only its own output;
/// reductions over the results are then performed serially in index order,
/// which keeps every computation bit-identical for any worker count.
template <typename F>
void parallel_for(std::size_t count, F&& fn) {
    int workers = worker_count();
    if (workers <= 1 || count < 2048) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::size_t nthreads = std::min<std::size_t>(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (count + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace psv
