#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sirtail/constant.hpp"
#include "sirtail/fading.hpp"

namespace sirtail {

struct QuadConfig {
    double abs_tol = 1e-10;        // outer-integral absolute tolerance
    double rel_tol = 1e-9;         // outer-integral relative tolerance
    int laguerre_order = 64;       // nodes of the Gamma-weighted inner rule
    double product_tail_tol = 1e-8; // allowed residual of the product-tail correction
    double t_max_initial = 8.0;    // outer cutoff start; doubled until the decay bound holds
    double t_max_limit = 4096.0;
    int max_product_terms = 400000;

    QuadConfig tightened(double factor = 10.0) const
    {
        QuadConfig c = *this;
        c.abs_tol /= factor;
        c.rel_tol /= factor;
        c.product_tail_tol /= factor;
        c.laguerre_order += 32;
        return c;
    }
};

struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

// Poisson closed form (beta/pi) * sin(pi/beta); fading-independent.
ConstantEstimate poisson_constant(double beta);

// Ginibre constant by infinite-product quadrature for a general
// Gamma-family or deterministic propagation-effect distribution.
ConstantEstimate ginibre_constant(const FadingSpec& fading, double beta,
                                  const QuadConfig& cfg = {});

// Ginibre constant in the Nakagami-m normal form
// beta/B(m,1/beta) * integral of the product of Gamma-weighted factors.
ConstantEstimate ginibre_nakagami_constant(double beta, double m, const QuadConfig& cfg = {});

// Jensen lower bound: coefficient E[H^{1/beta}]/(E H)^{1/beta} applied
// to the no-fading constant of the same point process.
ConstantEstimate jensen_lower_bound(const FadingSpec& fading, double beta,
                                    const ConstantEstimate& c_delta1);
double jensen_coefficient(const FadingSpec& fading, double beta);

struct IdentityCheck {
    double quadrature = 0.0; // 2*pi * int F_H-bar(r^{2 beta}) r dr
    double closed_form = 0.0; // pi * E[H^{1/beta}]
    double rel_gap = 0.0;
};

// Radial-integral identity of the H fractional moment.
IdentityCheck h_integral_identity_check(const FadingSpec& fading, double beta,
                                        const QuadConfig& cfg = {});

// --- shared machinery, exposed for tests ---

// Gauss quadrature rules for the probability measure Gamma(alpha+1, 1)
// (weight u^alpha e^-u normalized to unit mass), built by Golub-Welsch.
class GammaLaguerre {
public:
    explicit GammaLaguerre(int order);
    struct Rule {
        std::vector<double> nodes;
        std::vector<double> weights; // sum to 1
    };
    const Rule& rule(int alpha) const;
    int order() const { return order_; }

private:
    int order_;
    mutable std::map<int, Rule> cache_;
};

struct ProductIntegral {
    double value = 0.0;  // integral of prod_i g_i(t) dt over [0, t_max]
    double width = 0.0;  // deterministic error bracket (half-width)
    double t_max = 0.0;
    int max_terms_used = 0;
};

// Outer integral of the infinite product of Gamma-weighted Laplace
// factors g_i(t) = E[L((t/Y)^beta)], Y ~ Gamma(i+1,1). m1..m3 are the
// first three moments of the distribution whose Laplace transform is L.
ProductIntegral ginibre_product_integral(const std::function<double(double)>& laplace, double m1,
                                         double m2, double m3, double beta,
                                         const QuadConfig& cfg);

// Single product factor by the Gamma-weighted Gauss rule (exposed for
// oracle tests against adaptive quadrature).
double ginibre_product_factor(const GammaLaguerre& rules, const std::function<double(double)>& laplace,
                              int index, double t, double beta);

// Factor with the small-index branch by adaptive quadrature: the Gauss
// rule loses accuracy when the weight mass sits near the u -> 0
// non-analyticity of L((t/u)^beta), i.e. for index <~ 3t.
double ginibre_product_factor_hybrid(const GammaLaguerre& rules,
                                     const std::function<double(double)>& laplace, int index,
                                     double t, double beta);

} // namespace sirtail
