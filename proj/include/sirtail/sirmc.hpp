#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sirtail/constant.hpp"
#include "sirtail/fading.hpp"
#include "sirtail/ppsampler.hpp"

namespace sirtail {

struct McParams {
    std::uint64_t n_samples = 1000000;
    int n_points = 500; // radii kept per replicate
    std::uint64_t seed = 1;
    int threads = 1;
};

struct TailEntry {
    double theta = 0.0;
    double p_hat = 0.0; // residual-corrected estimate
    double ci_low = 0.0;
    double ci_high = 0.0;
    double scaled = 0.0;         // theta^{1/beta} * p_hat
    double p_hat_uncorrected = 0.0; // truncated interference only (bracket mate)
};

struct TailCurve {
    double beta = 0.0;
    ProcessModel model = ProcessModel::ginibre();
    FadingSpec fading = FadingSpec::deterministic();
    std::vector<TailEntry> entries;
    std::uint64_t n_samples = 0;
    int n_points = 0;
    std::uint64_t seed = 0;
};

// 20 log-spaced values spanning [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);

// Per-replicate SIR given squared distances and effects; the far field
// beyond the kept points enters through its mean,
// residual_rate*pi*mean_h*r_max^(2-2beta)/(beta-1). Exposed for the
// exact scale-invariance tests.
double sir_value(std::span<const double> sq_radii, std::span<const double> effects, double beta,
                 double residual_rate, double mean_h);
double sir_value_truncated(std::span<const double> sq_radii, std::span<const double> effects,
                           double beta);

// Monte Carlo tail P(SIR > theta) over a theta grid. Requires a model
// with distance-only structure (Poisson or Ginibre).
TailCurve estimate_sir_tail(const ProcessModel& model, const FadingSpec& fading, double beta,
                            std::span<const double> theta_grid, const McParams& params);

// Palm-expectation estimator of the asymptotic constant
// pi*lambda*E[H^{1/beta}]*E0[(sum H_i/|X_i|^{2 beta})^{-1/beta}].
// The value is the midpoint of the truncation bracket (upper: truncated
// sum; lower: sum plus mean far-field).
ConstantEstimate estimate_palm_constant(const ProcessModel& model, const FadingSpec& fading,
                                        double beta, const McParams& params);

struct InvarianceReport {
    ConstantEstimate first;
    ConstantEstimate second;
    double gap = 0.0;
    double combined_std_error = 0.0;
    bool consistent = false; // |gap| <= 3 * combined std error
};

// Palm constants for two Poisson intensities; flags disagreement beyond
// three combined standard errors.
InvarianceReport check_intensity_invariance(double lambda1, double lambda2,
                                            const FadingSpec& fading, double beta,
                                            const McParams& params);

} // namespace sirtail
