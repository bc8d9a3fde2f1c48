#include "sirtail/ppsampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <boost/math/special_functions/gamma.hpp>

namespace sirtail {

std::string ProcessModel::describe() const
{
    switch (kind_) {
    case Kind::Poisson: return "poisson(lambda=" + std::to_string(param_) + ")";
    case Kind::Ginibre: return "ginibre";
    case Kind::LatticeMix: return "latticemix(a=" + std::to_string(param_) + ")";
    }
    return "?";
}

void fill_poisson_sq_radii(double lambda, std::span<double> out, Philox& rng)
{
    const double rate = lambda * ProcessModel::pi();
    double acc = 0.0;
    for (double& v : out) {
        acc += rng.exponential() / rate;
        v = acc;
    }
}

void fill_ginibre_sq_radii(bool palm, std::span<double> out, Philox& rng)
{
    const double offset = palm ? 1.0 : 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = rng.gamma(static_cast<double>(i + 1) + offset);
}

RadiiSample sample_poisson_radii(double lambda, int n, Philox& rng)
{
    if (!(lambda > 0.0))
        throw std::invalid_argument("sample_poisson_radii: lambda must be positive");
    if (n < 1)
        throw std::invalid_argument("sample_poisson_radii: need at least one point");
    RadiiSample s{{}, ProcessModel::poisson(lambda), true, lambda};
    std::vector<double> sq(static_cast<std::size_t>(n));
    fill_poisson_sq_radii(lambda, sq, rng);
    s.radii.resize(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        s.radii[i] = std::sqrt(sq[i]);
    return s;
}

RadiiSample sample_ginibre_radii(bool palm, int n, Philox& rng)
{
    if (n < 1)
        throw std::invalid_argument("sample_ginibre_radii: need at least one point");
    RadiiSample s{{}, ProcessModel::ginibre(), palm, 1.0 / ProcessModel::pi()};
    std::vector<double> sq(static_cast<std::size_t>(n));
    fill_ginibre_sq_radii(palm, sq, rng);
    std::sort(sq.begin(), sq.end());
    s.radii.resize(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        s.radii[i] = std::sqrt(sq[i]);
    return s;
}

LatticePalmDraw sample_lattice_palm(double a, Philox& rng)
{
    if (!(a > 1.0) || !(a < 2.0))
        throw std::invalid_argument("sample_lattice_palm: shape must lie in (1,2)");
    // Palm law of the spacing has density a*t^(-a-1) on [1,inf).
    return {std::pow(rng.uniform_pos(), -1.0 / a), a};
}

PlanarPalmSample sample_poisson_planar_palm(double lambda, double window_radius, Philox& rng)
{
    if (!(lambda > 0.0))
        throw std::invalid_argument("sample_poisson_planar_palm: lambda must be positive");
    if (!(window_radius > 0.0))
        throw std::invalid_argument("sample_poisson_planar_palm: window radius must be positive");
    const double mean = lambda * ProcessModel::pi() * window_radius * window_radius;
    // Inversion by exponential spacings on the unit-mean scale.
    std::uint64_t count = 0;
    double acc = rng.exponential();
    while (acc <= mean) {
        ++count;
        acc += rng.exponential();
    }
    PlanarPalmSample s{{}, window_radius, ProcessModel::poisson(lambda)};
    s.points.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const double r = window_radius * std::sqrt(rng.uniform());
        const double phi = 2.0 * ProcessModel::pi() * rng.uniform();
        s.points.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return s;
}

GinibrePalmBasis::GinibrePalmBasis(double window_radius, double eps_eig)
    : window_radius_(window_radius), eps_eig_(eps_eig)
{
    if (!(window_radius > 0.0))
        throw std::invalid_argument("ginibre basis: window radius must be positive");
    if (!(eps_eig > 0.0) || !(eps_eig < 1.0))
        throw std::invalid_argument("ginibre basis: eigenvalue cutoff must lie in (0,1)");
    const double r2 = window_radius * window_radius;
    // kappa_k decreases in k; enumerate until below cutoff past the bulk.
    for (int k = 1;; ++k) {
        const double kappa = boost::math::gamma_p(static_cast<double>(k + 1), r2);
        if (kappa < eps_eig) {
            if (static_cast<double>(k) > r2)
                break;
            continue; // tiny leading eigenvalue cannot occur; keep scanning anyway
        }
        kappa_.push_back(kappa);
        expected_count_ += kappa;
        if (k > 4 * r2 + 64)
            break;
    }
}

namespace {

// Values of the orthonormal palm-kernel eigenfunctions at z, restricted
// to the selected modes. psi_k(z) = z^k exp(-|z|^2/2) / sqrt(pi k!)
// divided by sqrt(kappa_k); modes[j] holds k and 1/sqrt(kappa_k).
struct SelectedModes {
    std::vector<int> k;
    std::vector<double> inv_sqrt_kappa;
};

void eval_modes(const SelectedModes& modes, double x, double y,
                std::vector<std::complex<double>>& out)
{
    const std::complex<double> z(x, y);
    const double r2 = x * x + y * y;
    // w_k = z^k exp(-r2/2)/sqrt(pi k!), built by w_k = w_{k-1} * z / sqrt(k).
    std::complex<double> w = std::exp(-0.5 * r2) / std::sqrt(ProcessModel::pi());
    int next = 1;
    std::size_t j = 0;
    while (j < modes.k.size()) {
        w *= z / std::sqrt(static_cast<double>(next));
        if (modes.k[j] == next) {
            out[j] = w * modes.inv_sqrt_kappa[j];
            ++j;
        }
        ++next;
    }
}

} // namespace

PlanarPalmSample sample_ginibre_planar_palm(const GinibrePalmBasis& basis, Philox& rng,
                                            std::uint64_t rejection_cap)
{
    const double R = basis.window_radius();
    const double r2max = R * R;
    PlanarPalmSample sample{{}, R, ProcessModel::ginibre()};

    // Phase 1: Bernoulli selection of modes.
    SelectedModes modes;
    const auto& kappa = basis.eigenvalues();
    for (std::size_t j = 0; j < kappa.size(); ++j) {
        if (rng.uniform() < kappa[j]) {
            modes.k.push_back(static_cast<int>(j + 1));
            modes.inv_sqrt_kappa.push_back(1.0 / std::sqrt(kappa[j]));
        }
    }
    const int n = static_cast<int>(modes.k.size());
    if (n == 0)
        return sample;

    // Phase 2: sequential conditional sampling. Proposals come from the
    // exact first-point density K(z,z)/n (a uniform mixture over the
    // selected modes, each radially a truncated Gamma); acceptance
    // ratio is the projection residual against the Gram-Schmidt basis
    // of the already-chosen kernel columns.
    std::vector<std::vector<std::complex<double>>> ortho; // rows of length n
    std::vector<std::complex<double>> v(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> proj(static_cast<std::size_t>(n));
    sample.points.reserve(static_cast<std::size_t>(n));

    for (int pt = 0; pt < n; ++pt) {
        std::uint64_t proposals = 0;
        for (;;) {
            if (++proposals > rejection_cap)
                throw SamplerStallError(pt, proposals, R, n);
            // Propose from the mixture.
            const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
            const int k = modes.k[static_cast<std::size_t>(j)];
            const double mass = boost::math::gamma_p(static_cast<double>(k + 1), r2max);
            const double s =
                boost::math::gamma_p_inv(static_cast<double>(k + 1), rng.uniform() * mass);
            const double r = std::sqrt(std::min(s, r2max));
            const double phi = 2.0 * ProcessModel::pi() * rng.uniform();
            const double x = r * std::cos(phi);
            const double y = r * std::sin(phi);

            eval_modes(modes, x, y, v);
            double norm2 = 0.0;
            for (const auto& c : v)
                norm2 += std::norm(c);
            double residual = norm2;
            for (std::size_t l = 0; l < ortho.size(); ++l) {
                std::complex<double> dot(0.0, 0.0);
                const auto& f = ortho[l];
                for (int q = 0; q < n; ++q)
                    dot += std::conj(f[static_cast<std::size_t>(q)]) * v[static_cast<std::size_t>(q)];
                proj[l] = dot;
                residual -= std::norm(dot);
            }
            if (residual <= 0.0 || norm2 <= 0.0)
                continue;
            if (rng.uniform() * norm2 >= residual)
                continue;

            // Accepted: extend the orthonormal basis with the residual direction.
            std::vector<std::complex<double>> f(v);
            for (std::size_t l = 0; l < ortho.size(); ++l) {
                const auto& g = ortho[l];
                for (int q = 0; q < n; ++q)
                    f[static_cast<std::size_t>(q)] -= proj[l] * g[static_cast<std::size_t>(q)];
            }
            const double inv = 1.0 / std::sqrt(residual);
            for (auto& c : f)
                c *= inv;
            ortho.push_back(std::move(f));
            sample.points.push_back({x, y});
            break;
        }
    }
    return sample;
}

PlanarPalmSample sample_ginibre_planar_palm(double window_radius, double eps_eig, Philox& rng,
                                            std::uint64_t rejection_cap)
{
    const GinibrePalmBasis basis(window_radius, eps_eig);
    return sample_ginibre_planar_palm(basis, rng, rejection_cap);
}

} // namespace sirtail
