#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sirtail/asymquad.hpp"
#include "sirtail/sirmc.hpp"

using namespace sirtail;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

// Oracle for a single product factor: adaptive quadrature of
// u^i e^-u / i! * L((t/u)^beta) over (0, inf).
double factor_oracle(const std::function<double(double)>& laplace, int i, double t, double beta)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    const double log_norm = std::lgamma(static_cast<double>(i) + 1.0);
    return integrator.integrate(
        [&](double u) {
            return std::exp(static_cast<double>(i) * std::log(u) - u - log_norm) *
                   laplace(std::pow(t / u, beta));
        },
        1e-12);
}

} // namespace

TEST_CASE("poisson closed form")
{
    CHECK(std::abs(poisson_constant(2.0).value - 2.0 / kPi) < 1e-15);
    CHECK(poisson_constant(4.0).value ==
          doctest::Approx(2.0 * std::sqrt(2.0) / kPi).epsilon(1e-14));
    const double c = poisson_constant(1000.0).value;
    CHECK(c > 0.99999835);
    CHECK(c < 0.99999837);
    CHECK(poisson_constant(2.0).bracket_low == poisson_constant(2.0).bracket_high);
    CHECK_THROWS_AS(poisson_constant(1.0), std::invalid_argument);
}

TEST_CASE("gamma-laguerre rules integrate gamma moments exactly")
{
    const GammaLaguerre rules(64);
    for (const int alpha : {0, 1, 5, 40, 300}) {
        const auto& r = rules.rule(alpha);
        double w_sum = 0.0, m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < r.nodes.size(); ++j) {
            w_sum += r.weights[j];
            m1 += r.weights[j] * r.nodes[j];
            m2 += r.weights[j] * r.nodes[j] * r.nodes[j];
        }
        const double a1 = alpha + 1.0;
        CHECK(w_sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m1 == doctest::Approx(a1).epsilon(1e-12));
        CHECK(m2 == doctest::Approx(a1 * (a1 + 1.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(GammaLaguerre(8), std::invalid_argument);
}

TEST_CASE("product factors match the adaptive-quadrature oracle")
{
    const GammaLaguerre rules(64);
    const std::function<double(double)> rayleigh = [](double s) { return 1.0 / (1.0 + s); };
    const std::function<double(double)> nak2 = [](double s) {
        return std::pow(1.0 + 0.5 * s, -2.0);
    };
    const std::function<double(double)> det = [](double s) { return std::exp(-s); };
    for (const auto* lap : {&rayleigh, &nak2, &det})
        for (const double beta : {1.5, 2.0, 3.0})
            for (const int i : {1, 3, 10, 60})
                for (const double t : {0.3, 1.0, 2.5, 6.0}) {
                    const double got = ginibre_product_factor_hybrid(rules, *lap, i, t, beta);
                    const double want = factor_oracle(*lap, i, t, beta);
                    CHECK(std::abs(got - want) < 1e-9 * std::max(1.0, std::abs(want)));
                }
    // the raw Gauss rule is already at machine precision deep in the index
    for (const int i : {40, 60})
        for (const double t : {0.5, 2.0}) {
            const double got = ginibre_product_factor(rules, rayleigh, i, t, 2.0);
            CHECK(std::abs(got - factor_oracle(rayleigh, i, t, 2.0)) < 1e-12);
        }
}

TEST_CASE("factor properties: unity at t=0, nonincreasing in t, increasing in index")
{
    const GammaLaguerre rules(64);
    const std::function<double(double)> lap = [](double s) { return 1.0 / (1.0 + s); };
    for (const int i : {1, 2, 7})
        CHECK(ginibre_product_factor(rules, lap, i, 0.0, 2.0) == doctest::Approx(1.0));
    for (const int i : {1, 4, 16}) {
        double prev = 1.0;
        for (double t = 0.25; t <= 8.0; t += 0.25) {
            const double g = ginibre_product_factor(rules, lap, i, t, 2.0);
            CHECK(g <= prev + 1e-12);
            prev = g;
        }
    }
    for (const double t : {0.5, 2.0}) {
        double prev = 0.0;
        for (const int i : {1, 2, 4, 8, 16}) {
            const double g = ginibre_product_factor(rules, lap, i, t, 2.0);
            CHECK(g >= prev - 1e-12);
            prev = g;
        }
    }
}

TEST_CASE("telescoped gamma-ratio tails match brute-force sums")
{
    const double beta = 1.7;
    const int start = 50;
    for (const int k : {1, 2, 3}) {
        const double kb = k * beta;
        double brute = 0.0;
        for (int i = start + 1; i <= 3000000; ++i) {
            const double term =
                std::exp(std::lgamma(i + 1.0 - kb) - std::lgamma(i + 1.0));
            brute += term;
            if (term < 1e-16 * brute && i > start + 100)
                break;
        }
        const double telescoped =
            std::exp(std::lgamma(start + 2.0 - kb) - std::lgamma(start + 1.0)) / (kb - 1.0);
        CHECK(brute == doctest::Approx(telescoped).epsilon(k == 1 ? 2e-4 : 1e-9));
    }
}

TEST_CASE("eq14/eq15 equivalence at m=1, beta=2, and the trivial prefactor")
{
    const auto a = ginibre_constant(FadingSpec::nakagami(1.0), 2.0);
    const auto b = ginibre_nakagami_constant(2.0, 1.0);
    CHECK(std::abs(a.value - b.value) / b.value < 1e-6);
    CHECK(a.bracket_low <= a.value);
    CHECK(a.value <= a.bracket_high);
    // beta/B(m,1/beta) = 2/B(1,1/2) = 1
    const double pref = 2.0 / (std::tgamma(1.0) * std::tgamma(0.5) / std::tgamma(1.5));
    CHECK(pref == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eq14/eq15 equivalence across the m grid")
{
    for (const double beta : {1.5, 2.0, 3.0})
        for (const double m : {0.5, 2.0, 4.0}) {
            const auto a = ginibre_constant(FadingSpec::nakagami(m), beta);
            const auto b = ginibre_nakagami_constant(beta, m);
            CHECK(std::abs(a.value - b.value) / std::abs(b.value) < 1e-6);
        }
}

TEST_CASE("quadrature self-consistency under tighter tolerances")
{
    const QuadConfig base;
    const auto v = ginibre_nakagami_constant(2.0, 1.0, base);
    const auto vt = ginibre_nakagami_constant(2.0, 1.0, base.tightened());
    const double halfwidth = 0.5 * (v.bracket_high - v.bracket_low) +
                             0.5 * (vt.bracket_high - vt.bracket_low);
    CHECK(std::abs(v.value - vt.value) <= halfwidth + 1e-14);
}

TEST_CASE("nakagami constant concentrates on the deterministic one as m grows")
{
    const auto det = ginibre_constant(FadingSpec::deterministic(), 2.0);
    const auto m64 = ginibre_nakagami_constant(2.0, 64.0);
    CHECK(std::abs(m64.value - det.value) / det.value < 0.01);
}

TEST_CASE("m=64 nakagami constant sits within 1% of the unfaded palm-MC value")
{
    const auto m64 = ginibre_nakagami_constant(2.0, 64.0);
    McParams params{30000, 400, 1212, 2};
    const auto mc = estimate_palm_constant(ProcessModel::ginibre(), FadingSpec::deterministic(),
                                           2.0, params);
    CHECK(std::abs(m64.value - mc.value) / mc.value < 0.01);
}

TEST_CASE("jensen coefficient and bound")
{
    CHECK(jensen_coefficient(FadingSpec::deterministic(), 2.0) == doctest::Approx(1.0));
    CHECK(jensen_coefficient(FadingSpec::nakagami(1.0), 2.0) ==
          doctest::Approx(std::tgamma(1.5)).epsilon(1e-12));
    for (const double m : {0.5, 1.0, 2.0, 4.0})
        for (const double beta : {1.5, 2.0, 3.0, 4.0})
            CHECK(jensen_coefficient(FadingSpec::nakagami(m), beta) <= 1.0 + 1e-12);

    const auto c = poisson_constant(2.0);
    const auto bound = jensen_lower_bound(FadingSpec::nakagami(1.0), 2.0, c);
    CHECK(bound.value == doctest::Approx(std::tgamma(1.5) * c.value).epsilon(1e-12));
    const auto eq = jensen_lower_bound(FadingSpec::deterministic(), 2.0, c);
    CHECK(eq.value == doctest::Approx(c.value));
}

TEST_CASE("fractional-moment integral identity")
{
    const auto r1 = h_integral_identity_check(FadingSpec::nakagami(1.0), 2.0);
    CHECK(r1.closed_form == doctest::Approx(kPi * std::sqrt(kPi) / 2.0).epsilon(1e-12));
    CHECK(r1.rel_gap <= 1e-8);
    const auto r2 = h_integral_identity_check(FadingSpec::deterministic(), 2.0);
    CHECK(r2.quadrature == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(r2.rel_gap <= 1e-10);
    const auto r3 = h_integral_identity_check(FadingSpec::nakagami(4.0), 3.0);
    CHECK(r3.rel_gap <= 1e-8);
}

TEST_CASE("outer-cutoff failure is reported as a quadrature error")
{
    QuadConfig cfg;
    cfg.t_max_initial = 2.0;
    cfg.t_max_limit = 2.0;
    CHECK_THROWS_AS(ginibre_constant(FadingSpec::rayleigh(), 1.5, cfg), QuadratureError);
}

TEST_CASE("parameter guards")
{
    CHECK_THROWS_AS(ginibre_constant(FadingSpec::rayleigh(), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ginibre_nakagami_constant(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ginibre_nakagami_constant(0.5, 1.0), std::invalid_argument);
}
