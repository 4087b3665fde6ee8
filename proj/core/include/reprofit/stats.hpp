#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace reprofit {

inline double mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Unbiased sample variance (n-1 denominator), two-pass.
inline double variance(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

/// Interpolated quantile on a sorted sample (R type 7):
/// h = (n-1)p, q = x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)]).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    return quantile_sorted(x, p);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

/// Inverse-CDF (lower) quantile on a sorted sample: the ceil(np)-th order
/// statistic. Used for count-valued prediction intervals, where the bound
/// must be an actual attainable value.
template <typename T>
inline T quantile_lower_sorted(const std::vector<T>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const double np = p * static_cast<double>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(np));
    if (rank == 0) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

}  // namespace reprofit
