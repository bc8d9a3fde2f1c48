#include "sirtail/fading.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace sirtail {

FadingSpec FadingSpec::gamma_dist(double shape, double scale)
{
    if (!(shape > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("fading: Gamma shape and scale must be positive");
    return FadingSpec(Kind::Gamma, shape, scale);
}

double FadingSpec::laplace(double s) const
{
    if (s < 0.0)
        throw std::invalid_argument("fading: Laplace transform argument must be >= 0");
    if (kind_ == Kind::Deterministic)
        return std::exp(-s);
    return std::exp(-shape_ * std::log1p(scale_ * s));
}

double FadingSpec::frac_moment(double p) const
{
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("fading: fractional moment order must be in (0,1]");
    if (kind_ == Kind::Deterministic)
        return 1.0;
    return std::pow(scale_, p) *
           std::exp(std::lgamma(shape_ + p) - std::lgamma(shape_));
}

double FadingSpec::moment(int k) const
{
    if (k < 1 || k > 3)
        throw std::invalid_argument("fading: integer moment order must be 1..3");
    if (kind_ == Kind::Deterministic)
        return 1.0;
    double m = 1.0;
    for (int j = 0; j < k; ++j)
        m *= scale_ * (shape_ + j);
    return m;
}

double FadingSpec::cdf_upper(double x) const
{
    if (kind_ == Kind::Deterministic)
        return x < 1.0 ? 1.0 : 0.0;
    if (x <= 0.0)
        return 1.0;
    return boost::math::gamma_q(shape_, x / scale_);
}

std::pair<double, double> FadingSpec::condition_b_params(double beta) const
{
    if (!(beta > 1.0))
        throw std::invalid_argument("fading: beta must exceed 1");
    if (kind_ == Kind::Deterministic) {
        // exp(-s) <= exp(-1)/s on s >= 1 (maximum of s*exp(-s) at s=1).
        return {1.0, std::exp(-1.0)};
    }
    return {shape_, std::pow(scale_, -shape_)};
}

double FadingSpec::sample(Philox& rng) const
{
    if (kind_ == Kind::Deterministic)
        return 1.0;
    return scale_ * rng.gamma(shape_);
}

std::string FadingSpec::describe() const
{
    if (kind_ == Kind::Deterministic)
        return "deterministic";
    return "gamma(shape=" + std::to_string(shape_) + ",scale=" + std::to_string(scale_) + ")";
}

bool check_condition_b_certificate(const FadingSpec& spec, double alpha, double c_h)
{
    const int n = 241;
    for (int i = 0; i < n; ++i) {
        const double s = std::pow(10.0, 6.0 * i / (n - 1)); // 1 .. 1e6
        if (spec.laplace(s) > c_h * std::pow(s, -alpha) * (1.0 + 1e-12))
            return false;
    }
    return true;
}

} // namespace sirtail
