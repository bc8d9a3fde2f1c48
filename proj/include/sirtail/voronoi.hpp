#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sirtail/ppsampler.hpp"
#include "sirtail/stats.hpp"

namespace sirtail {

// Voronoi cell of the origin: convex, CCW-ordered, origin strictly
// inside whenever bounded. The circumscribed radius is the radius of
// the smallest origin-centered disk containing the cell.
struct CellPolygon {
    std::vector<std::array<double, 2>> vertices; // CCW
    std::vector<int> edge_source; // edge i runs vertices[i] -> [i+1]; -1 = clip box
    bool bounded = false;
    double circumradius = 0.0;
};

// Intersection of the half-planes {x : |x| <= |x - p|} over the given
// points, clipped to the square [-box_halfwidth, box_halfwidth]^2.
// Points are processed in ascending distance with an early exit once no
// remaining point can cut the cell. bounded is true iff no box edge
// survives.
CellPolygon cell_of_origin(std::span<const std::array<double, 2>> points, double box_halfwidth);

bool polygon_contains(const CellPolygon& cell, double x, double y, double eps = 1e-12);

// Area of one of the seven Foss-Zuyev petals of parameter r.
double petal_area(double r);

// Exponents of the Ginibre circumscribed-radius bound 7*exp(-(u v v)).
double ginibre_petal_u(double r);
double ginibre_petal_v(double r);
// The bound itself, clipped to [0,1].
double ginibre_petal_bound(double r);
// Radius where u and v cross (bisection to 1e-6).
double ginibre_petal_crossing();

struct BoundValue {
    double value = 1.0;
    bool valid = false;
};

// Calka's Poisson bound 4*pi*lambda*r^2*exp(-pi*lambda*r^2); valid for
// r*sqrt(lambda) >= 0.337 (dimensionless reading of the stated r0).
BoundValue calka_poisson_bound(double lambda, double r);

// Generic determinantal petal bound 7*exp(-max(0, lambda*petal_area(r)-1)),
// clipped to [0,1].
double generic_petal_bound(double lambda, double r);

struct KernelL2Result {
    double closed_form = 0.0; // (1/pi)(1 - exp(-R^2))
    double quadrature = 0.0;
    double gap = 0.0;
};

// Integral of |K(0,z)|^2 over the disk of radius R for the Ginibre
// kernel, closed form and 2D quadrature.
KernelL2Result ginibre_kernel_l2(double R);

struct SurvivalCurve {
    std::vector<double> r_grid;
    std::vector<double> survival;  // empirical P(R(o) > r) over valid replicates
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    std::uint64_t n_valid = 0;
    std::uint64_t n_discarded = 0; // guard-zone breaches (counted, reported)
    double window = 0.0;
};

struct SurvivalParams {
    std::uint64_t n_samples = 10000;
    double window = 0.0; // 0 = model default
    std::uint64_t seed = 1;
    int threads = 1;
};

// Empirical survival of the typical-cell circumscribed radius. Poisson
// uses Slivnyak (origin + stationary points in a disk window with a
// half-window guard zone); Ginibre uses the exact planar Palm sampler;
// LatticeMix uses the exact R(o)^2 = (1+T^2)/4 identity, no geometry.
SurvivalCurve circumscribed_radius_survival(const ProcessModel& model,
                                            std::span<const double> r_grid,
                                            const SurvivalParams& params);

struct RunningMeans {
    std::vector<std::uint64_t> levels;
    std::vector<double> means;
};

struct ConditionAReport {
    RunningMeans cell_radius_sq;                 // R(o)^2
    std::vector<RunningMeans> distance_sq;       // |X_k|^2 for each requested k
    std::vector<int> ks;
    std::string verdict;        // "stabilizing" / "diverging" / "indeterminate"
    bool analytic_infinite = false; // LatticeMix: E[R(o)^2] = inf analytically
    double discard_rate = 0.0;
};

// Running means of R(o)^2 and |X_k|^2 at the given sample-size levels.
// Levels are evaluated at the enclosing 1000-replicate block boundary.
ConditionAReport condition_a_report(const ProcessModel& model, std::span<const int> ks,
                                    std::span<const std::uint64_t> levels, std::uint64_t seed,
                                    int threads = 1, double window = 0.0);

// Exact circumscribed radius of the lattice-mix typical cell given the
// Palm spacing draw.
inline double lattice_cell_radius(double spacing)
{
    return 0.5 * std::sqrt(1.0 + spacing * spacing);
}

// Squared distances of the k nearest points of (Z x TZ) \ {0} from a
// lattice point (enumeration; T >= 1, small k).
std::vector<double> lattice_nearest_sq(double spacing, int k);

// Palm identity check material for the counterexample: Monte Carlo mean
// of 1/(1+T) under the Palm spacing law, and the stationary-side value
// (1/lambda) E[1/((1+T)T)] by quadrature.
MeanVar lattice_palm_identity_mc(double a, std::uint64_t n, std::uint64_t seed, int threads);
double lattice_palm_identity_quad(double a);

} // namespace sirtail
