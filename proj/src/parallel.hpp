#pragma once

// Chunked execution with a deterministic, order-preserving reduction.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace outage::detail {

/// Running mean and centred second moment; merge() is Chan's pairwise update.
struct MomentAccumulator {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const MomentAccumulator& o) noexcept {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n = static_cast<double>(count) + static_cast<double>(o.count);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.count) / n;
        m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
        count += o.count;
    }

    /// Unbiased sample variance (0 for fewer than two values).
    double variance() const noexcept { return count > 1 ? std::max(0.0, m2 / static_cast<double>(count - 1)) : 0.0; }
};

/// Runs fn(chunk) for chunk in [0, n_chunks) on up to `workers` threads and
/// returns results indexed by chunk. An exception from the lowest-numbered
/// failing chunk is rethrown after all threads join.
template <class R, class Fn>
std::vector<R> run_chunks(std::size_t n_chunks, unsigned workers, Fn&& fn) {
    std::vector<R> out(n_chunks);
    const unsigned w = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n_chunks, 1)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n_chunks; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(n_chunks);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_chunks) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (unsigned t = 0; t < w; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace outage::detail
