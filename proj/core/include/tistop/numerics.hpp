#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tistop {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sample mean and standard error of the mean.
struct MeanStat {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

template <class Range, class Proj>
MeanStat mean_stat(const Range& items, Proj proj) {
    MeanStat s;
    s.n = std::size(items);
    if (s.n == 0) return s;
    CompensatedSum sum;
    for (const auto& it : items) sum.add(proj(it));
    s.mean = sum.value() / static_cast<double>(s.n);
    if (s.n > 1) {
        CompensatedSum sq;
        for (const auto& it : items) {
            const double d = proj(it) - s.mean;
            sq.add(d * d);
        }
        s.std_error = std::sqrt(sq.value() / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
    }
    return s;
}

/// As above; with `paired`, items 2k and 2k+1 are antithetic partners and the
/// standard error comes from the pair means (a trailing odd item is left out
/// of the error but kept in the mean).
template <class Range, class Proj>
MeanStat mean_stat(const Range& items, Proj proj, bool paired) {
    MeanStat s = mean_stat(items, proj);
    if (!paired) return s;
    std::vector<double> pairs;
    pairs.reserve(s.n / 2);
    auto it = std::begin(items);
    for (std::size_t k = 0; k + 1 < s.n; k += 2) {
        const double a = proj(*it++);
        const double b = proj(*it++);
        pairs.push_back(0.5 * (a + b));
    }
    s.std_error = pairs.size() > 1 ? mean_stat(pairs, [](double v) { return v; }).std_error : 0.0;
    return s;
}

/// Worker count to use: `requested` if positive, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested) noexcept {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Evaluate `fn(i)` for i in [0, n) and return the results in index order.
///
/// Work is split into contiguous chunks; output position depends only on i, so
/// any downstream reduction in index order is independent of thread count.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn fn) {
    std::vector<T> out(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> xs;
    if (n == 0) return xs;
    xs.reserve(n);
    if (n == 1) {
        xs.push_back(lo);
        return xs;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(i + 1 == n ? hi : lo + step * static_cast<double>(i));
    return xs;
}

}  // namespace tistop
