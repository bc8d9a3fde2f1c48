#pragma once

#include <string>
#include <utility>

#include "sirtail/rng.hpp"

namespace sirtail {

// Distribution of the per-station propagation effect H (fading and
// shadowing combined). Two families are supported: the point mass at 1
// and the Gamma family, which covers Rayleigh (Gamma(1,1)) and
// Nakagami-m (Gamma(m, 1/m)). Both have closed-form Laplace transforms
// with power-law decay, so the tail-asymptotics validity condition can
// be certified exactly.
class FadingSpec {
public:
    enum class Kind { Deterministic, Gamma };

    static FadingSpec deterministic() { return FadingSpec(Kind::Deterministic, 0.0, 0.0); }
    static FadingSpec gamma_dist(double shape, double scale);
    static FadingSpec rayleigh() { return gamma_dist(1.0, 1.0); }
    static FadingSpec nakagami(double m) { return gamma_dist(m, 1.0 / m); }

    Kind kind() const { return kind_; }
    double shape() const { return shape_; }
    double scale() const { return scale_; }

    // Laplace transform E[exp(-sH)], s >= 0.
    double laplace(double s) const;

    // Fractional moment E[H^p] for p in (0,1].
    double frac_moment(double p) const;

    // Integer moments E[H^k], k = 1..3 (used by series truncation bounds).
    double moment(int k) const;
    double mean() const { return moment(1); }

    // Upper CDF \bar F_H(x) = P(H > x).
    double cdf_upper(double x) const;

    // Power-law decay certificate (alpha, c_H) with
    // laplace(s) <= c_H * s^-alpha for all s >= 1.
    std::pair<double, double> condition_b_params(double beta) const;

    double sample(Philox& rng) const;

    std::string describe() const;

private:
    FadingSpec(Kind kind, double shape, double scale) : kind_(kind), shape_(shape), scale_(scale) {}

    Kind kind_;
    double shape_;
    double scale_;
};

// Checks laplace(s) * s^alpha <= c_h on a log-spaced grid s in [1, 1e6].
bool check_condition_b_certificate(const FadingSpec& spec, double alpha, double c_h);

} // namespace sirtail
