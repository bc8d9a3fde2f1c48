#include "sirtail/sirmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sirtail/parallel.hpp"
#include "sirtail/stats.hpp"

namespace sirtail {

namespace {

constexpr double kPi = ProcessModel::pi();

// x^-beta for squared distances; beta=2 is the common case in the hot loop.
inline double inv_pow(double x, double beta)
{
    if (beta == 2.0)
        return 1.0 / (x * x);
    if (beta == 3.0)
        return 1.0 / (x * x * x);
    return std::pow(x, -beta);
}

void check_common(const ProcessModel& model, const FadingSpec& fading, double beta,
                  const McParams& params)
{
    if (beta <= 1.05)
        throw std::invalid_argument(
            "sirmc: beta <= 1.05 rejected (residual correction unreliable near 1)");
    if (params.n_points < 2)
        throw std::invalid_argument("sirmc: need at least two points (no interferer otherwise)");
    if (params.n_samples == 0)
        throw std::invalid_argument("sirmc: need at least one replicate");
    if (model.kind() == ProcessModel::Kind::LatticeMix)
        throw std::invalid_argument("sirmc: lattice-mix model has no distance sampler");
    const auto [alpha, c_h] = fading.condition_b_params(beta);
    if (!check_condition_b_certificate(fading, alpha, c_h))
        throw std::invalid_argument("sirmc: fading fails the Laplace-decay certificate");
}

void fill_sq_radii(const ProcessModel& model, bool palm, std::span<double> out, Philox& rng)
{
    if (model.kind() == ProcessModel::Kind::Poisson)
        fill_poisson_sq_radii(model.lambda(), out, rng); // palm = stationary (Slivnyak)
    else
        fill_ginibre_sq_radii(palm, out, rng);
}

} // namespace

std::vector<double> log_spaced(double lo, double hi, int n)
{
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        grid[static_cast<std::size_t>(i)] =
            lo * std::pow(hi / lo, n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
    return grid;
}

double sir_value(std::span<const double> sq_radii, std::span<const double> effects, double beta,
                 double residual_rate, double mean_h)
{
    std::size_t nearest = 0;
    double s_min = sq_radii[0];
    double r_max = sq_radii[0];
    for (std::size_t i = 1; i < sq_radii.size(); ++i) {
        if (sq_radii[i] < s_min) {
            s_min = sq_radii[i];
            nearest = i;
        }
        r_max = std::max(r_max, sq_radii[i]);
    }
    double interference = 0.0;
    for (std::size_t i = 0; i < sq_radii.size(); ++i)
        if (i != nearest)
            interference += effects[i] * inv_pow(sq_radii[i], beta);
    const double residual =
        residual_rate * kPi * mean_h * std::pow(r_max, 1.0 - beta) / (beta - 1.0);
    return effects[nearest] * inv_pow(s_min, beta) / (interference + residual);
}

double sir_value_truncated(std::span<const double> sq_radii, std::span<const double> effects,
                           double beta)
{
    return sir_value(sq_radii, effects, beta, 0.0, 0.0);
}

TailCurve estimate_sir_tail(const ProcessModel& model, const FadingSpec& fading, double beta,
                            std::span<const double> theta_grid, const McParams& params)
{
    check_common(model, fading, beta, params);
    if (theta_grid.empty())
        throw std::invalid_argument("estimate_sir_tail: empty theta grid");
    for (std::size_t i = 0; i < theta_grid.size(); ++i)
        if (!(theta_grid[i] > 0.0) ||
            (i + 1 < theta_grid.size() && !(theta_grid[i] < theta_grid[i + 1])))
            throw std::invalid_argument("estimate_sir_tail: theta grid must be positive ascending");

    const std::uint32_t salt = stream_salt(
        "tail:" + model.describe() + ":" + fading.describe() + ":beta=" + std::to_string(beta) +
        ":N=" + std::to_string(params.n_points));
    const double mean_h = fading.mean();
    const double residual_rate = model.intensity();
    const std::size_t n_grid = theta_grid.size();
    const std::size_t n_pts = static_cast<std::size_t>(params.n_points);

    struct Partial {
        std::vector<std::uint64_t> exceed;      // residual-corrected SIR
        std::vector<std::uint64_t> exceed_trunc; // truncated-interference SIR
    };
    const auto partials = run_blocks<Partial>(
        params.n_samples, 4096, params.threads,
        [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
            Partial part;
            part.exceed.assign(n_grid, 0);
            part.exceed_trunc.assign(n_grid, 0);
            std::vector<double> sq(n_pts), h(n_pts);
            for (std::uint64_t rep = b; rep < e; ++rep) {
                Philox rng(params.seed, replicate_stream(salt, rep));
                fill_sq_radii(model, false, sq, rng);
                for (auto& v : h)
                    v = fading.sample(rng);
                const double sir = sir_value(sq, h, beta, residual_rate, mean_h);
                const double sir_trunc = sir_value_truncated(sq, h, beta);
                for (std::size_t i = 0; i < n_grid; ++i) {
                    if (sir > theta_grid[i])
                        ++part.exceed[i];
                    else
                        break; // grid ascending
                }
                for (std::size_t i = 0; i < n_grid; ++i) {
                    if (sir_trunc > theta_grid[i])
                        ++part.exceed_trunc[i];
                    else
                        break;
                }
            }
            return part;
        });

    std::vector<std::uint64_t> exceed(n_grid, 0), exceed_trunc(n_grid, 0);
    for (const auto& p : partials)
        for (std::size_t i = 0; i < n_grid; ++i) {
            exceed[i] += p.exceed[i];
            exceed_trunc[i] += p.exceed_trunc[i];
        }

    TailCurve curve;
    curve.beta = beta;
    curve.model = model;
    curve.fading = fading;
    curve.n_samples = params.n_samples;
    curve.n_points = params.n_points;
    curve.seed = params.seed;
    curve.entries.resize(n_grid);
    const double n = static_cast<double>(params.n_samples);
    for (std::size_t i = 0; i < n_grid; ++i) {
        TailEntry& en = curve.entries[i];
        en.theta = theta_grid[i];
        en.p_hat = static_cast<double>(exceed[i]) / n;
        const auto ci = wilson_interval(exceed[i], params.n_samples);
        en.ci_low = ci.low;
        en.ci_high = ci.high;
        en.scaled = std::pow(en.theta, 1.0 / beta) * en.p_hat;
        en.p_hat_uncorrected = static_cast<double>(exceed_trunc[i]) / n;
    }
    return curve;
}

ConstantEstimate estimate_palm_constant(const ProcessModel& model, const FadingSpec& fading,
                                        double beta, const McParams& params)
{
    check_common(model, fading, beta, params);
    const std::uint32_t salt = stream_salt(
        "palm:" + model.describe() + ":" + fading.describe() + ":beta=" + std::to_string(beta) +
        ":N=" + std::to_string(params.n_points));
    const double mean_h = fading.mean();
    const double lambda = model.intensity();
    const std::size_t n_pts = static_cast<std::size_t>(params.n_points);
    const double inv_beta = 1.0 / beta;

    struct Partial {
        double sum_hi = 0.0;  // truncated sum: upper bracket
        double sum_lo = 0.0;  // with mean far-field: lower bracket
        double sum_mid = 0.0;
        double sum_mid_sq = 0.0;
    };
    const auto partials = run_blocks<Partial>(
        params.n_samples, 4096, params.threads,
        [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
            Partial part;
            std::vector<double> sq(n_pts), h(n_pts);
            for (std::uint64_t rep = b; rep < e; ++rep) {
                Philox rng(params.seed, replicate_stream(salt, rep));
                fill_sq_radii(model, true, sq, rng);
                double s = 0.0;
                double r_max = 0.0;
                for (std::size_t i = 0; i < n_pts; ++i) {
                    h[i] = fading.sample(rng);
                    s += h[i] * inv_pow(sq[i], beta);
                    r_max = std::max(r_max, sq[i]);
                }
                const double ds =
                    lambda * kPi * mean_h * std::pow(r_max, 1.0 - beta) / (beta - 1.0);
                const double x_hi = std::pow(s, -inv_beta);
                const double x_lo = std::pow(s + ds, -inv_beta);
                const double mid = 0.5 * (x_hi + x_lo);
                part.sum_hi += x_hi;
                part.sum_lo += x_lo;
                part.sum_mid += mid;
                part.sum_mid_sq += mid * mid;
            }
            return part;
        });

    Partial total;
    for (const auto& p : partials) {
        total.sum_hi += p.sum_hi;
        total.sum_lo += p.sum_lo;
        total.sum_mid += p.sum_mid;
        total.sum_mid_sq += p.sum_mid_sq;
    }
    const double pref = kPi * lambda * fading.frac_moment(inv_beta);
    const auto mv = mean_and_se(total.sum_mid, total.sum_mid_sq, params.n_samples);

    ConstantEstimate c;
    c.value = pref * mv.mean;
    c.std_error = pref * mv.std_error;
    c.bracket_low = pref * total.sum_lo / static_cast<double>(params.n_samples);
    c.bracket_high = pref * total.sum_hi / static_cast<double>(params.n_samples);
    c.method = "palm-mc";
    c.beta = beta;
    c.model = model.describe();
    c.fading = fading.describe();
    c.n_samples = params.n_samples;
    c.n_points = params.n_points;
    return c;
}

InvarianceReport check_intensity_invariance(double lambda1, double lambda2,
                                            const FadingSpec& fading, double beta,
                                            const McParams& params)
{
    InvarianceReport rep;
    rep.first = estimate_palm_constant(ProcessModel::poisson(lambda1), fading, beta, params);
    rep.second = estimate_palm_constant(ProcessModel::poisson(lambda2), fading, beta, params);
    rep.gap = std::abs(rep.first.value - rep.second.value);
    rep.combined_std_error = std::sqrt(rep.first.std_error * rep.first.std_error +
                                       rep.second.std_error * rep.second.std_error);
    rep.consistent = rep.gap <= 3.0 * rep.combined_std_error;
    return rep;
}

} // namespace sirtail
