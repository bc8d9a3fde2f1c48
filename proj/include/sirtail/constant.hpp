#pragma once

#include <cstdint>
#include <string>

namespace sirtail {

// An asymptotic-constant value with its provenance: closed form,
// deterministic quadrature, or Palm Monte Carlo. bracket_[low,high] is a
// deterministic error bracket (truncation, quadrature remainder);
// std_error is the statistical error (zero for deterministic methods).
struct ConstantEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
    std::string method; // "closed-form" | "quadrature" | "palm-mc"
    double beta = 0.0;
    std::string model;
    std::string fading;
    std::uint64_t n_samples = 0;
    int n_points = 0;
};

} // namespace sirtail
