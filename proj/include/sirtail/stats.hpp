#pragma once

#include <cmath>
#include <cstdint>

namespace sirtail {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for a binomial proportion; z defaults to the
// two-sided 95% normal quantile.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double z = 1.959963984540054)
{
    if (trials == 0)
        return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double rad = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::fmax(0.0, center - rad), std::fmin(1.0, center + rad)};
}

struct MeanVar {
    double mean = 0.0;
    double std_error = 0.0;
};

inline MeanVar mean_and_se(double sum, double sum_sq, std::uint64_t n)
{
    MeanVar mv;
    if (n == 0)
        return mv;
    const double dn = static_cast<double>(n);
    mv.mean = sum / dn;
    if (n > 1) {
        const double var = std::fmax(0.0, (sum_sq - dn * mv.mean * mv.mean) / (dn - 1.0));
        mv.std_error = std::sqrt(var / dn);
    }
    return mv;
}

} // namespace sirtail
