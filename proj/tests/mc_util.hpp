#pragma once

// Monte-Carlo comparison helpers shared by the unit and acceptance suites.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

namespace mc {

struct EmpiricalPmf {
    std::map<long, long> counts;
    long n_draws = 0;

    void add(long value) {
        ++counts[value];
        ++n_draws;
    }
    double mass(long value) const {
        const auto it = counts.find(value);
        return it == counts.end() ? 0.0 : static_cast<double>(it->second) / n_draws;
    }
};

/// Total-variation distance between an empirical pmf and an exact pmf,
/// computed on an equal-mass coarsening: contiguous integer bins are closed
/// once they hold >= min_bin_mass of exact probability (so at most
/// 1/min_bin_mass + 1 bins and the Monte-Carlo noise stays bounded
/// independently of how wide the distribution is). For narrow distributions
/// the bins degenerate to single integers and this is the pointwise TV.
inline double grouped_tv_distance(const EmpiricalPmf& emp,
                                  const std::function<double(long)>& exact_pmf,
                                  double min_bin_mass = 0.05,
                                  double tail_mass = 1e-12) {
    // Scan the support until the remaining exact tail is negligible.
    long hi = 0;
    {
        double cum = 0.0;
        double prev = 0.0;
        for (long n = 0;; ++n) {
            const double p = exact_pmf(n);
            cum += p;
            if (cum > 1.0 - tail_mass) {
                hi = n;
                break;
            }
            // Far past the mode the pmf decays; stop once it is negligible.
            if (n > 1000 && p < 1e-17 && p <= prev) {
                hi = n;
                break;
            }
            prev = p;
        }
    }

    double tv = 0.0;
    double bin_exact = 0.0;
    double bin_emp = 0.0;
    for (long n = 0; n <= hi; ++n) {
        bin_exact += exact_pmf(n);
        bin_emp += emp.mass(n);
        if (bin_exact >= min_bin_mass) {
            tv += std::fabs(bin_emp - bin_exact);
            bin_exact = 0.0;
            bin_emp = 0.0;
        }
    }
    // Leftover bin plus everything the scan did not reach.
    double emp_above = 0.0;
    for (const auto& [value, count] : emp.counts) {
        if (value > hi) emp_above += static_cast<double>(count) / emp.n_draws;
    }
    tv += std::fabs((bin_emp + emp_above) - (bin_exact + tail_mass));
    return 0.5 * tv;
}

inline double sample_mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / x.size();
}

inline double sample_variance(const std::vector<double>& x) {
    const double m = sample_mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / (x.size() - 1);
}

/// Standard error of the sample variance from the empirical fourth moment.
inline double variance_standard_error(const std::vector<double>& x) {
    const double m = sample_mean(x);
    const double n = static_cast<double>(x.size());
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d2 = (v - m) * (v - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    const double var_of_var = (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n;
    return std::sqrt(std::max(var_of_var, 0.0));
}

}  // namespace mc
