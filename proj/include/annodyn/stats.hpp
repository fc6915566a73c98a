#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "annodyn/errors.hpp"

namespace annodyn {

/// Percentile of an ascending-sorted list by linear interpolation at rank
/// position (m-1)*pct/100. pct in [0, 100]; the list must be non-empty.
inline double percentile_sorted(std::span<const double> sorted_values, double pct) {
    const std::size_t m = sorted_values.size();
    if (m == 0) throw DomainError("percentile of an empty list");
    if (m == 1) return sorted_values[0];
    double pos = (double)(m - 1) * pct / 100.0;
    if (pos <= 0.0) return sorted_values.front();
    if (pos >= (double)(m - 1)) return sorted_values.back();
    std::size_t lo = (std::size_t)pos;
    double frac = pos - (double)lo;
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

inline double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / (double)xs.size();
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
inline double sample_std(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / (double)(n - 1));
}

/// Pearson correlation coefficient. Requires |xs| == |ys| >= 2 and nonzero
/// variance on both sides.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw DomainError("pearson: input lengths differ");
    const std::size_t n = xs.size();
    if (n < 2) throw DomainError("pearson: need at least 2 points");
    double mx = mean_of(xs), my = mean_of(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DomainError("pearson: undefined correlation (zero variance)");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace annodyn
