#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sirtail/rng.hpp"

namespace sirtail {

// Base-station deployment model. Ginibre is the standard one with
// intensity 1/pi; LatticeMix is the mixed, randomly shifted lattice
// (Z x TZ) + U with a Pareto-tailed spacing T, intensity (a-1)/a.
class ProcessModel {
public:
    enum class Kind { Poisson, Ginibre, LatticeMix };

    static ProcessModel poisson(double lambda)
    {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("process: Poisson intensity must be positive and finite");
        return ProcessModel(Kind::Poisson, lambda);
    }
    static ProcessModel ginibre() { return ProcessModel(Kind::Ginibre, 0.0); }
    static ProcessModel lattice_mix(double a)
    {
        if (!(a > 1.0) || !(a < 2.0))
            throw std::invalid_argument("process: lattice shape must lie in (1,2)");
        return ProcessModel(Kind::LatticeMix, a);
    }

    Kind kind() const { return kind_; }

    double intensity() const
    {
        switch (kind_) {
        case Kind::Poisson: return param_;
        case Kind::Ginibre: return 1.0 / pi();
        case Kind::LatticeMix: return (param_ - 1.0) / param_;
        }
        return 0.0;
    }

    double lambda() const { return param_; }      // Poisson only
    double lattice_shape() const { return param_; } // LatticeMix only

    std::string describe() const;

    static constexpr double pi() { return 3.141592653589793238462643383279502884; }

private:
    ProcessModel(Kind kind, double param) : kind_(kind), param_(param) {}

    Kind kind_;
    double param_;
};

// Sorted finite prefix of the distances |X_i| from the origin, with the
// residual point rate kept for truncation bookkeeping.
struct RadiiSample {
    std::vector<double> radii; // strictly ascending, all > 0
    ProcessModel model;
    bool palm = false;
    double residual_rate = 0.0; // points per unit area beyond radii.back()
};

struct PlanarPalmSample {
    std::vector<std::array<double, 2>> points; // origin excluded
    double window_radius = 0.0;
    ProcessModel model;
};

struct LatticePalmDraw {
    double spacing = 1.0; // T >= 1
    double shape = 1.5;   // a
};

struct SamplerStallError : std::runtime_error {
    SamplerStallError(int point_index_, std::uint64_t proposals_, double window_radius_,
                      int n_modes_)
        : std::runtime_error("ginibre planar sampler stalled at point " +
                             std::to_string(point_index_) + " after " +
                             std::to_string(proposals_) + " proposals (R=" +
                             std::to_string(window_radius_) + ", modes=" +
                             std::to_string(n_modes_) + ")"),
          point_index(point_index_), proposals(proposals_), window_radius(window_radius_),
          n_modes(n_modes_)
    {
    }
    int point_index;
    std::uint64_t proposals;
    double window_radius;
    int n_modes;
};

// --- low-level squared-radius fills (hot Monte Carlo path) ---

// Squared distances of the n nearest Poisson points: cumulative sums of
// Exp(lambda*pi) variables; ascending by construction.
void fill_poisson_sq_radii(double lambda, std::span<double> out, Philox& rng);

// Squared moduli of the Ginibre process in Kostlan form: independent
// Gamma(i+1,1) draws under the reduced Palm version (palm=true) and
// Gamma(i,1) in the stationary case. Not sorted.
void fill_ginibre_sq_radii(bool palm, std::span<double> out, Philox& rng);

// --- samplers ---

RadiiSample sample_poisson_radii(double lambda, int n, Philox& rng);
RadiiSample sample_ginibre_radii(bool palm, int n, Philox& rng);
LatticePalmDraw sample_lattice_palm(double a, Philox& rng);
PlanarPalmSample sample_poisson_planar_palm(double lambda, double window_radius, Philox& rng);

// Eigen-structure of the reduced-Palm Ginibre kernel restricted to the
// disk of radius R: mode k (k >= 1) has eigenfunction ~ z^k exp(-|z|^2/2)
// and eigenvalue kappa_k = P(Gamma(k+1,1) <= R^2). Modes below eps_eig
// are dropped. Reusable across samples and threads (immutable).
class GinibrePalmBasis {
public:
    GinibrePalmBasis(double window_radius, double eps_eig);

    double window_radius() const { return window_radius_; }
    double eps_eig() const { return eps_eig_; }
    const std::vector<double>& eigenvalues() const { return kappa_; } // kappa_[j] for mode k = j+1
    double expected_count() const { return expected_count_; }

private:
    double window_radius_;
    double eps_eig_;
    std::vector<double> kappa_;
    double expected_count_ = 0.0;
};

// Exact determinantal projection sampling of the reduced-Palm Ginibre
// process on the disk of radius R (two-phase: Bernoulli mode selection,
// then sequential conditional sampling by rejection).
PlanarPalmSample sample_ginibre_planar_palm(const GinibrePalmBasis& basis, Philox& rng,
                                            std::uint64_t rejection_cap = 1000000);
PlanarPalmSample sample_ginibre_planar_palm(double window_radius, double eps_eig, Philox& rng,
                                            std::uint64_t rejection_cap = 1000000);

} // namespace sirtail
