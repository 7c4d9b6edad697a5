#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace toda {

// Welford accumulator; merge() is Chan's pairwise update, applied in index order.
struct RunningStats {
    std::int64_t n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double nt = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / nt;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nt;
        n += o.n;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_mean() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

inline RunningStats merge_in_order(const std::vector<RunningStats>& parts) {
    RunningStats out;
    for (const auto& p : parts) out.merge(p);
    return out;
}

}  // namespace toda
