#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sirtail/asymquad.hpp"
#include "sirtail/sirmc.hpp"

using namespace sirtail;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("per-replicate SIR is exactly scale invariant")
{
    const std::vector<double> sq{0.5, 2.0, 3.0, 7.5};
    const std::vector<double> h{1.0, 0.7, 2.2, 0.4};
    for (const double beta : {1.5, 2.0, 3.3}) {
        const double base = sir_value(sq, h, beta, 1.0, 1.3);
        for (const double c : {0.1, 2.0, 17.0}) {
            std::vector<double> sq_scaled(sq);
            for (auto& v : sq_scaled)
                v *= c * c; // radii scaled by c
            const double scaled = sir_value(sq_scaled, h, beta, 1.0 / (c * c), 1.3);
            CHECK(scaled == doctest::Approx(base).epsilon(1e-13));
        }
    }
}

TEST_CASE("per-replicate SIR is exactly fading-scale invariant")
{
    const std::vector<double> sq{0.5, 2.0, 3.0, 7.5};
    const std::vector<double> h{1.0, 0.7, 2.2, 0.4};
    const double base = sir_value(sq, h, 2.0, 1.0, 1.3);
    for (const double c : {0.25, 3.0}) {
        std::vector<double> hc(h);
        for (auto& v : hc)
            v *= c;
        CHECK(sir_value(sq, hc, 2.0, 1.0, c * 1.3) == doctest::Approx(base).epsilon(1e-13));
    }
}

TEST_CASE("residual correction can only lower the SIR")
{
    const std::vector<double> sq{0.5, 2.0, 3.0};
    const std::vector<double> h{1.0, 0.7, 2.2};
    CHECK(sir_value_truncated(sq, h, 2.0) > sir_value(sq, h, 2.0, 1.0, 1.0));
}

TEST_CASE("tail at vanishing theta is one")
{
    McParams params{2000, 50, 11, 2};
    const std::vector<double> grid{1e-9, 1e-6};
    const auto curve = estimate_sir_tail(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0,
                                         grid, params);
    CHECK(curve.entries[0].p_hat == doctest::Approx(1.0));
}

TEST_CASE("poisson-rayleigh tail matches the coverage oracle at theta = 100")
{
    McParams params{50000, 400, 4242, 2};
    const std::vector<double> grid{100.0};
    const auto curve = estimate_sir_tail(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0,
                                         grid, params);
    // oracle: 1/(1 + sqrt(theta) (pi/2 - atan(1/sqrt(theta)))) = 0.06364855...
    const double oracle = 1.0 / (1.0 + 10.0 * (kPi / 2.0 - std::atan(0.1)));
    CHECK(oracle == doctest::Approx(0.06364855).epsilon(1e-6));
    CHECK(curve.entries[0].ci_low <= oracle);
    CHECK(oracle <= curve.entries[0].ci_high);
    CHECK(curve.entries[0].p_hat_uncorrected >= curve.entries[0].p_hat);
}

TEST_CASE("tail curve is nonincreasing within CI overlap and scaled curve is flat")
{
    McParams params{100000, 200, 555, 2};
    const auto grid = log_spaced(10.0, 1e5, 21);
    const auto curve = estimate_sir_tail(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0,
                                         grid, params);
    for (std::size_t i = 1; i < curve.entries.size(); ++i)
        CHECK(curve.entries[i].p_hat <= curve.entries[i - 1].ci_high + 1e-12);

    // weighted least squares on the top decade of theta^{1/2} p vs log theta
    double sw = 0.0, swx = 0.0, swy = 0.0;
    std::vector<std::array<double, 3>> pts;
    for (const auto& e : curve.entries) {
        if (e.theta < 1e4 * (1.0 - 1e-9))
            continue;
        const double sigma =
            std::sqrt(e.theta) * std::max(1e-12, (e.ci_high - e.ci_low) / (2.0 * 1.96));
        const double w = 1.0 / (sigma * sigma);
        pts.push_back({std::log(e.theta), e.scaled, w});
        sw += w;
        swx += w * std::log(e.theta);
        swy += w * e.scaled;
    }
    REQUIRE(pts.size() >= 4);
    const double xbar = swx / sw, ybar = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y, w] : pts) {
        sxx += w * (x - xbar) * (x - xbar);
        sxy += w * (x - xbar) * (y - ybar);
    }
    const double slope = sxy / sxx;
    const double slope_se = 1.0 / std::sqrt(sxx);
    CHECK(std::abs(slope) <= 3.0 * slope_se);
}

TEST_CASE("ginibre stationary tail: sane curve, scaled value near the constant")
{
    McParams params{30000, 500, 4321, 2};
    const auto grid = log_spaced(10.0, 1e4, 7);
    const auto curve = estimate_sir_tail(ProcessModel::ginibre(), FadingSpec::nakagami(1.0), 2.0,
                                         grid, params);
    for (std::size_t i = 1; i < curve.entries.size(); ++i)
        CHECK(curve.entries[i].p_hat <= curve.entries[i - 1].ci_high + 1e-12);
    const auto& last = curve.entries.back(); // theta = 1e4
    const auto quad = ginibre_nakagami_constant(2.0, 1.0);
    const double se_scaled = std::sqrt(last.theta) * (last.ci_high - last.ci_low) / (2.0 * 1.96);
    CHECK(std::abs(last.scaled - quad.value) < 4.0 * se_scaled + 0.02 * quad.value);
}

TEST_CASE("palm constant: poisson recovers the closed form for rayleigh and delta-1")
{
    for (const auto& fading : {FadingSpec::rayleigh(), FadingSpec::deterministic()}) {
        McParams params{100000, 400, 808, 2};
        const auto c = estimate_palm_constant(ProcessModel::poisson(1.0), fading, 2.0, params);
        CHECK(c.bracket_low <= c.value);
        CHECK(c.value <= c.bracket_high);
        CHECK(c.value > 0.0);
        CHECK(std::abs(c.value - 2.0 / kPi) < 3.5 * c.std_error + (c.bracket_high - c.bracket_low));
    }
}

TEST_CASE("palm constant: ginibre agrees with the eq-15 quadrature")
{
    McParams params{30000, 400, 909, 2};
    const auto mc =
        estimate_palm_constant(ProcessModel::ginibre(), FadingSpec::nakagami(1.0), 2.0, params);
    const auto quad = ginibre_nakagami_constant(2.0, 1.0);
    CHECK(std::abs(mc.value - quad.value) <
          4.0 * mc.std_error + (mc.bracket_high - mc.bracket_low));
}

TEST_CASE("truncation bracket shrinks as more points are kept")
{
    double prev_width = std::numeric_limits<double>::infinity();
    for (const int n_points : {50, 200, 800}) {
        McParams params{20000, n_points, 313, 2};
        const auto c =
            estimate_palm_constant(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0, params);
        const double width = c.bracket_high - c.bracket_low;
        CHECK(width > 0.0);
        CHECK(width < prev_width);
        prev_width = width;
    }
}

TEST_CASE("intensity invariance: different lambdas agree, identical lambdas coincide")
{
    McParams params{50000, 300, 616, 2};
    const auto rep = check_intensity_invariance(1.0, 4.0, FadingSpec::rayleigh(), 2.0, params);
    CHECK(rep.consistent);
    CHECK(rep.combined_std_error > 0.0);

    const auto same = check_intensity_invariance(1.0, 1.0, FadingSpec::rayleigh(), 2.0, params);
    CHECK(same.gap == 0.0);

    McParams p3{30000, 300, 617, 2};
    const auto rep3 = check_intensity_invariance(0.25, 2.25, FadingSpec::rayleigh(), 3.0, p3);
    CHECK(rep3.consistent);
}

TEST_CASE("parameter guards")
{
    McParams params{100, 1, 1, 1};
    CHECK_THROWS_AS(estimate_palm_constant(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0,
                                           params),
                    std::invalid_argument);
    McParams ok{100, 10, 1, 1};
    CHECK_THROWS_AS(estimate_palm_constant(ProcessModel::poisson(1.0), FadingSpec::rayleigh(),
                                           1.02, ok),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_palm_constant(ProcessModel::lattice_mix(1.5), FadingSpec::rayleigh(),
                                           2.0, ok),
                    std::invalid_argument);
    const std::vector<double> bad_grid{5.0, 2.0};
    CHECK_THROWS_AS(estimate_sir_tail(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0,
                                      bad_grid, ok),
                    std::invalid_argument);
}

TEST_CASE("results are independent of the worker count")
{
    const auto grid = log_spaced(10.0, 1e3, 5);
    McParams p1{10000, 60, 2718, 1};
    McParams p4{10000, 60, 2718, 4};
    const auto c1 = estimate_sir_tail(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0,
                                      grid, p1);
    const auto c4 = estimate_sir_tail(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0,
                                      grid, p4);
    for (std::size_t i = 0; i < c1.entries.size(); ++i) {
        CHECK(c1.entries[i].p_hat == c4.entries[i].p_hat);
        CHECK(c1.entries[i].ci_high == c4.entries[i].ci_high);
    }
    const auto k1 = estimate_palm_constant(ProcessModel::ginibre(), FadingSpec::nakagami(2.0), 3.0,
                                           p1);
    const auto k4 = estimate_palm_constant(ProcessModel::ginibre(), FadingSpec::nakagami(2.0), 3.0,
                                           p4);
    CHECK(k1.value == k4.value);
    CHECK(k1.std_error == k4.std_error);
}
