#pragma once

#include <cbrl/error.hpp>

#include <cmath>
#include <numeric>
#include <span>

namespace cbrl::bench {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw ArgumentError("mean of an empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double sample_std(std::span<const double> xs) {
    const double m = mean(xs);
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Normal-approximation 95% half-width, 1.96 s / sqrt(n).
inline double ci95_half_width(std::span<const double> xs) {
    return 1.96 * sample_std(xs) / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace cbrl::bench
