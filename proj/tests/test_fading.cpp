#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sirtail/fading.hpp"
#include "sirtail/rng.hpp"

using namespace sirtail;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("laplace transform closed forms")
{
    CHECK(FadingSpec::gamma_dist(1.0, 1.0).laplace(1.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(FadingSpec::rayleigh().laplace(0.0) == doctest::Approx(1.0));
    CHECK(FadingSpec::deterministic().laplace(0.0) == doctest::Approx(1.0));
    CHECK(FadingSpec::deterministic().laplace(2.0) == doctest::Approx(std::exp(-2.0)));
    for (const double m : {0.5, 1.0, 2.0, 4.0})
        for (const double s : {0.1, 1.0, 10.0})
            CHECK(FadingSpec::nakagami(m).laplace(s) ==
                  doctest::Approx(std::pow(1.0 + s / m, -m)).epsilon(1e-13));
    CHECK_THROWS_AS(FadingSpec::rayleigh().laplace(-0.1), std::invalid_argument);
}

TEST_CASE("laplace is nonincreasing and log-convex on a grid")
{
    for (const auto& spec :
         {FadingSpec::deterministic(), FadingSpec::rayleigh(), FadingSpec::nakagami(3.0)}) {
        double prev = spec.laplace(0.0);
        std::vector<double> logs;
        for (int i = 0; i <= 40; ++i) {
            const double s = 0.25 * i;
            const double v = spec.laplace(s);
            CHECK(v <= prev + 1e-15);
            prev = v;
            logs.push_back(std::log(v));
        }
        for (std::size_t i = 1; i + 1 < logs.size(); ++i)
            CHECK(logs[i] <= 0.5 * (logs[i - 1] + logs[i + 1]) + 1e-12);
    }
}

TEST_CASE("fractional moments")
{
    // Nakagami(1), p=1/2: Gamma(3/2) = sqrt(pi)/2
    CHECK(FadingSpec::nakagami(1.0).frac_moment(0.5) ==
          doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-13));
    CHECK(FadingSpec::deterministic().frac_moment(0.37) == doctest::Approx(1.0));
    // Nakagami(m), p=1/beta closed form
    for (const double m : {0.5, 2.0, 4.0})
        for (const double beta : {1.5, 2.0, 3.0}) {
            const double p = 1.0 / beta;
            const double want =
                std::exp(std::lgamma(m + p) - std::lgamma(m)) / std::pow(m, p);
            CHECK(FadingSpec::nakagami(m).frac_moment(p) == doctest::Approx(want).epsilon(1e-12));
        }
    CHECK_THROWS_AS(FadingSpec::rayleigh().frac_moment(0.0), std::invalid_argument);
    CHECK_THROWS_AS(FadingSpec::rayleigh().frac_moment(1.5), std::invalid_argument);
}

TEST_CASE("fractional moment agrees with a sqrt-H sample mean")
{
    const auto spec = FadingSpec::nakagami(1.0);
    Philox rng(515, 0);
    const int n = 400000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = std::sqrt(spec.sample(rng));
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - spec.frac_moment(0.5)) < 3.0 * se);
}

TEST_CASE("jensen: frac moment below mean^p")
{
    for (const auto& spec :
         {FadingSpec::rayleigh(), FadingSpec::nakagami(0.5), FadingSpec::gamma_dist(2.0, 3.0)})
        for (const double p : {0.2, 0.5, 0.9})
            CHECK(spec.frac_moment(p) <= std::pow(spec.mean(), p) + 1e-12);
}

TEST_CASE("integer moments")
{
    const auto n2 = FadingSpec::nakagami(2.0); // Gamma(2, 1/2)
    CHECK(n2.moment(1) == doctest::Approx(1.0));
    CHECK(n2.moment(2) == doctest::Approx(2.0 * 3.0 / 4.0)); // b^2 (a)(a+1) = 1.5
    CHECK(n2.moment(3) == doctest::Approx(2.0 * 3.0 * 4.0 / 8.0));
    CHECK(FadingSpec::deterministic().moment(3) == doctest::Approx(1.0));
}

TEST_CASE("condition (B) parameters and certificate")
{
    const auto [a1, c1] = FadingSpec::gamma_dist(2.0, 0.5).condition_b_params(2.0);
    CHECK(a1 == doctest::Approx(2.0));
    CHECK(c1 == doctest::Approx(4.0));
    CHECK(check_condition_b_certificate(FadingSpec::gamma_dist(2.0, 0.5), a1, c1));

    const auto [a2, c2] = FadingSpec::nakagami(4.0).condition_b_params(2.0);
    CHECK(a2 == doctest::Approx(4.0));
    CHECK(c2 == doctest::Approx(256.0));
    CHECK(check_condition_b_certificate(FadingSpec::nakagami(4.0), a2, c2));

    // deterministic: exp(-s) <= 1/s on s >= 1
    CHECK(check_condition_b_certificate(FadingSpec::deterministic(), 1.0, 1.0));
    const auto [ad, cd] = FadingSpec::deterministic().condition_b_params(2.0);
    CHECK(check_condition_b_certificate(FadingSpec::deterministic(), ad, cd));

    // a deliberately wrong certificate fails
    CHECK_FALSE(check_condition_b_certificate(FadingSpec::rayleigh(), 2.0, 1.0));
}

TEST_CASE("upper CDF")
{
    CHECK(FadingSpec::deterministic().cdf_upper(0.5) == doctest::Approx(1.0));
    CHECK(FadingSpec::deterministic().cdf_upper(1.5) == doctest::Approx(0.0));
    CHECK(FadingSpec::rayleigh().cdf_upper(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("sampling matches the transform and the moments")
{
    const int n = 1000000;
    for (const auto& spec : {FadingSpec::rayleigh(), FadingSpec::nakagami(2.0)}) {
        Philox rng(2024, stream_salt(spec.describe()));
        double sum = 0.0, sum_sq = 0.0;
        double lap[3] = {0.0, 0.0, 0.0};
        const double svals[3] = {0.1, 1.0, 10.0};
        for (int i = 0; i < n; ++i) {
            const double h = spec.sample(rng);
            sum += h;
            sum_sq += h * h;
            for (int j = 0; j < 3; ++j)
                lap[j] += std::exp(-svals[j] * h);
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        const double se_mean = std::sqrt(var / n);
        CHECK(std::abs(mean - spec.mean()) < 3.0 * se_mean);
        for (int j = 0; j < 3; ++j) {
            const double est = lap[j] / n;
            const double se = std::sqrt(est * (1.0 - est) / n) + 1e-9;
            CHECK(std::abs(est - spec.laplace(svals[j])) < 3.5 * se);
        }
    }
    Philox rng(1, 2);
    CHECK(FadingSpec::deterministic().sample(rng) == 1.0);

    // Rayleigh: variance of Exp(1) is 1
    Philox rng2(11, 3);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double h = FadingSpec::rayleigh().sample(rng2);
        sum += h;
        sum_sq += h * h;
    }
    const double mean = sum / n;
    CHECK(std::abs(sum_sq / n - mean * mean - 1.0) < 0.03);
}

TEST_CASE("construction guards")
{
    CHECK_THROWS_AS(FadingSpec::gamma_dist(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(FadingSpec::gamma_dist(1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(FadingSpec::nakagami(-1.0), std::invalid_argument);
}
