#include "sirtail/validate.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sirtail/asymquad.hpp"
#include "sirtail/io.hpp"
#include "sirtail/parallel.hpp"
#include "sirtail/sirmc.hpp"
#include "sirtail/stats.hpp"
#include "sirtail/voronoi.hpp"

namespace sirtail::acceptance {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string fmt(double x) { return format_double(x); }

// Independent coverage oracle for the Poisson/Rayleigh stationary SIR
// tail: p(theta) = 1 / (1 + rho), rho = theta^{1/beta} *
// int_{theta^{-1/beta}}^inf du/(1+u^beta), by adaptive quadrature.
double poisson_rayleigh_coverage(double theta, double beta)
{
    using boost::math::quadrature::gauss_kronrod;
    const double lo = std::pow(theta, -1.0 / beta);
    const double integral = gauss_kronrod<double, 61>::integrate(
        [beta](double u) { return 1.0 / (1.0 + std::pow(u, beta)); }, lo,
        std::numeric_limits<double>::infinity(), 12, 1e-12);
    return 1.0 / (1.0 + std::pow(theta, 1.0 / beta) * integral);
}

class Runner {
public:
    Runner(const Options& opts, std::ostream& log) : opts_(opts), log_(log) {}

    std::vector<CriterionResult> run();

private:
    using Clock = std::chrono::steady_clock;

    void criterion(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& body)
    {
        CriterionResult res;
        res.id = id;
        res.name = name;
        const auto start = Clock::now();
        try {
            const auto [pass, detail] = body();
            res.pass = pass;
            res.detail = detail;
        } catch (const std::exception& e) {
            res.pass = false;
            res.detail = std::string("exception: ") + e.what();
        }
        res.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        log_ << (res.pass ? "[PASS]" : "[FAIL]") << " criterion " << res.id << ": " << res.name
             << " (" << fmt(res.seconds) << " s)\n       " << res.detail << "\n";
        log_.flush();
        results_.push_back(res);
    }

    // Quadrature constants are shared between criteria 5, 6 and 7.
    const ConstantEstimate& quad_eq15(double beta, double m)
    {
        const std::string key = "eq15:" + fmt(beta) + ":" + fmt(m);
        auto it = memo_.find(key);
        if (it == memo_.end())
            it = memo_.emplace(key, ginibre_nakagami_constant(beta, m, QuadConfig{})).first;
        return it->second;
    }
    const ConstantEstimate& quad_eq14_nakagami(double beta, double m)
    {
        const std::string key = "eq14:" + fmt(beta) + ":" + fmt(m);
        auto it = memo_.find(key);
        if (it == memo_.end())
            it = memo_.emplace(key, ginibre_constant(FadingSpec::nakagami(m), beta, QuadConfig{}))
                     .first;
        return it->second;
    }
    const ConstantEstimate& quad_eq14_det(double beta)
    {
        const std::string key = "eq14det:" + fmt(beta);
        auto it = memo_.find(key);
        if (it == memo_.end())
            it = memo_.emplace(key,
                               ginibre_constant(FadingSpec::deterministic(), beta, QuadConfig{}))
                     .first;
        return it->second;
    }

    Options opts_;
    std::ostream& log_;
    std::vector<CriterionResult> results_;
    std::map<std::string, ConstantEstimate> memo_;
};

std::vector<CriterionResult> Runner::run()
{
    const double two_over_pi = 2.0 / kPi;

    criterion(1, "Poisson closed form", [&]() -> std::pair<bool, std::string> {
        const double c2 = poisson_constant(2.0).value;
        const double c4 = poisson_constant(4.0).value;
        const double want4 = 2.0 * std::sqrt(2.0) / kPi; // (4/pi) sin(pi/4)
        const bool ok = std::abs(c2 - two_over_pi) <= 1e-12 && std::abs(c4 - want4) <= 1e-9;
        return {ok, "C(2)=" + fmt(c2) + " vs 2/pi=" + fmt(two_over_pi) + "; C(4)=" + fmt(c4) +
                        " vs " + fmt(want4)};
    });

    // Shared by criteria 2 and 3: one stationary tail run at beta=2.
    TailCurve tail;
    ConstantEstimate palm_poisson;
    criterion(2, "Poisson MC vs Corollary 2", [&]() -> std::pair<bool, std::string> {
        McParams params{1000000, 500, opts_.seed, opts_.threads};
        const auto grid = log_spaced(10.0, 1e5, 21); // hits 1e3 and 1e4 exactly
        tail = estimate_sir_tail(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0, grid,
                                 params);
        double scaled_at_1e4 = 0.0;
        for (const auto& e : tail.entries)
            if (std::abs(e.theta - 1e4) < 1e-6)
                scaled_at_1e4 = e.scaled;
        const double rel = std::abs(scaled_at_1e4 - two_over_pi) / two_over_pi;

        palm_poisson =
            estimate_palm_constant(ProcessModel::poisson(1.0), FadingSpec::rayleigh(), 2.0, params);
        const double gap = std::abs(palm_poisson.value - two_over_pi);
        const bool ok = rel <= 0.10 && gap <= 3.0 * palm_poisson.std_error;
        return {ok, "scaled(1e4)=" + fmt(scaled_at_1e4) + " (rel " + fmt(rel) + " vs 10%); palm=" +
                        fmt(palm_poisson.value) + " +- " + fmt(palm_poisson.std_error) + " vs " +
                        fmt(two_over_pi)};
    });

    criterion(3, "Poisson MC vs coverage oracle", [&]() -> std::pair<bool, std::string> {
        if (tail.entries.empty())
            return {false, "tail run unavailable (criterion 2 failed to run)"};
        bool ok = true;
        std::string worst;
        for (const auto& e : tail.entries) {
            if (e.theta > 1000.0 * (1.0 + 1e-9))
                continue;
            const double oracle = poisson_rayleigh_coverage(e.theta, 2.0);
            if (oracle < e.ci_low || oracle > e.ci_high) {
                ok = false;
                worst = "theta=" + fmt(e.theta) + " oracle=" + fmt(oracle) + " CI=[" +
                        fmt(e.ci_low) + "," + fmt(e.ci_high) + "]";
            }
        }
        return {ok, ok ? "oracle inside 95% CI at all grid theta <= 1e3" : worst};
    });

    criterion(4, "intensity invariance", [&]() -> std::pair<bool, std::string> {
        McParams params{400000, 500, opts_.seed, opts_.threads};
        const auto other =
            estimate_palm_constant(ProcessModel::poisson(4.0), FadingSpec::rayleigh(), 2.0, params);
        const double gap = std::abs(palm_poisson.value - other.value);
        const double se = std::sqrt(palm_poisson.std_error * palm_poisson.std_error +
                                    other.std_error * other.std_error);
        const bool ok = palm_poisson.n_samples > 0 && gap <= 3.0 * se;
        return {ok, "lambda=1: " + fmt(palm_poisson.value) + ", lambda=4: " + fmt(other.value) +
                        ", gap=" + fmt(gap) + " vs 3*se=" + fmt(3.0 * se)};
    });

    criterion(5, "Ginibre form equivalence + self-consistency",
              [&]() -> std::pair<bool, std::string> {
                  bool ok = true;
                  std::string detail;
                  for (const double beta : {1.5, 2.0, 3.0}) {
                      const auto& a = quad_eq14_nakagami(beta, 1.0);
                      const auto& b = quad_eq15(beta, 1.0);
                      const double rel = std::abs(a.value - b.value) / std::abs(b.value);
                      const auto tight =
                          ginibre_nakagami_constant(beta, 1.0, QuadConfig{}.tightened());
                      const double halfwidth = 0.5 * (b.bracket_high - b.bracket_low);
                      const double tight_halfwidth =
                          0.5 * (tight.bracket_high - tight.bracket_low);
                      const double drift = std::abs(tight.value - b.value);
                      const bool this_ok =
                          rel <= 1e-6 && drift <= halfwidth + tight_halfwidth + 1e-14;
                      ok = ok && this_ok;
                      detail += "beta=" + fmt(beta) + ": rel=" + fmt(rel) + ", drift=" +
                                fmt(drift) + "<=" + fmt(halfwidth + tight_halfwidth) + "; ";
                  }
                  return {ok, detail};
              });

    criterion(6, "Ginibre cross-method (Palm MC vs Eq. 15)",
              [&]() -> std::pair<bool, std::string> {
                  bool ok = true;
                  std::string detail;
                  for (const auto& [m, beta] : std::vector<std::pair<double, double>>{{1.0, 2.0},
                                                                                     {2.0, 3.0}}) {
                      McParams params{100000, 500, opts_.seed, opts_.threads};
                      const auto mc = estimate_palm_constant(ProcessModel::ginibre(),
                                                             FadingSpec::nakagami(m), beta, params);
                      const auto& quad = quad_eq15(beta, m);
                      const double gap = std::abs(mc.value - quad.value);
                      const bool this_ok = gap <= 3.0 * mc.std_error;
                      ok = ok && this_ok;
                      detail += "(m=" + fmt(m) + ",beta=" + fmt(beta) + "): mc=" + fmt(mc.value) +
                                "+-" + fmt(mc.std_error) + " quad=" + fmt(quad.value) + "; ";
                  }
                  return {ok, detail};
              });

    criterion(7, "Jensen bound grid", [&]() -> std::pair<bool, std::string> {
        const std::vector<double> betas{1.5, 2.0, 3.0, 4.0};
        const std::vector<double> ms{0.5, 1.0, 2.0, 4.0};
        bool ok = true;
        std::string detail;
        for (const double beta : betas) {
            // Poisson: constants are fading-independent, so the bound is
            // the statement coeff <= 1 with equality of the constants.
            const double c_poisson = poisson_constant(beta).value;
            for (const double m : ms) {
                const double coeff = jensen_coefficient(FadingSpec::nakagami(m), beta);
                if (!(coeff <= 1.0 + 1e-12) || !(c_poisson >= coeff * c_poisson - 1e-15)) {
                    ok = false;
                    detail += "poisson beta=" + fmt(beta) + " m=" + fmt(m) + " coeff=" +
                              fmt(coeff) + "; ";
                }
            }
            // Ginibre: quadrature constants on both sides.
            const auto& c_det = quad_eq14_det(beta);
            for (const double m : ms) {
                const auto& c_fad = quad_eq14_nakagami(beta, m);
                const auto bound = jensen_lower_bound(FadingSpec::nakagami(m), beta, c_det);
                const double slack = (c_fad.value - c_fad.bracket_low) +
                                     (bound.bracket_high - bound.value) + 1e-12;
                if (!(c_fad.value >= bound.value - slack)) {
                    ok = false;
                    detail += "ginibre beta=" + fmt(beta) + " m=" + fmt(m) + ": C=" +
                              fmt(c_fad.value) + " < bound=" + fmt(bound.value) + "; ";
                }
            }
        }
        if (ok)
            detail = "coeff<=1 and C(beta,F) >= coeff*C(beta,delta1) on the 4x4 grid "
                     "(Poisson closed form, Ginibre quadrature)";
        return {ok, detail};
    });

    criterion(8, "fractional-moment integral identity", [&]() -> std::pair<bool, std::string> {
        bool ok = true;
        std::string detail;
        for (const double beta : {1.5, 2.0, 3.0, 4.0}) {
            std::vector<FadingSpec> specs{FadingSpec::deterministic()};
            for (const double m : {0.5, 1.0, 2.0, 4.0})
                specs.push_back(FadingSpec::nakagami(m));
            for (const auto& spec : specs) {
                const auto chk = h_integral_identity_check(spec, beta);
                if (chk.rel_gap > 1e-8) {
                    ok = false;
                    detail += spec.describe() + " beta=" + fmt(beta) + " gap=" + fmt(chk.rel_gap) +
                              "; ";
                }
            }
        }
        if (ok)
            detail = "relative gap <= 1e-8 for deterministic + Nakagami {0.5,1,2,4} x beta "
                     "{1.5,2,3,4}";
        return {ok, detail};
    });

    criterion(9, "Voronoi cell vs dense-grid oracle", [&]() -> std::pair<bool, std::string> {
        const int n_configs = 1000;
        const int grid_n = 101;
        const double extent = 2.5;
        double worst_fraction = 0.0;
        for (int cfg_idx = 0; cfg_idx < n_configs; ++cfg_idx) {
            Philox rng(opts_.seed, replicate_stream(stream_salt("voronoi-oracle"),
                                                    static_cast<std::uint64_t>(cfg_idx)));
            const int n_pts = 5 + static_cast<int>(rng.next_u64() % 8);
            std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(n_pts));
            for (auto& p : pts) {
                // Uniform in the disk of radius 2, away from the origin.
                double x, y;
                do {
                    x = 4.0 * rng.uniform() - 2.0;
                    y = 4.0 * rng.uniform() - 2.0;
                } while (x * x + y * y > 4.0 || x * x + y * y < 1e-4);
                p = {x, y};
            }
            const auto cell = cell_of_origin(pts, 4.0);
            std::uint64_t mism = 0;
            for (int ix = 0; ix < grid_n; ++ix)
                for (int iy = 0; iy < grid_n; ++iy) {
                    const double x = -extent + 2.0 * extent * ix / (grid_n - 1);
                    const double y = -extent + 2.0 * extent * iy / (grid_n - 1);
                    const double d0 = x * x + y * y;
                    bool nearest_origin = true;
                    for (const auto& p : pts) {
                        const double dx = x - p[0];
                        const double dy = y - p[1];
                        if (dx * dx + dy * dy < d0) {
                            nearest_origin = false;
                            break;
                        }
                    }
                    if (nearest_origin != polygon_contains(cell, x, y, 1e-9))
                        ++mism;
                }
            worst_fraction = std::max(
                worst_fraction, static_cast<double>(mism) / (static_cast<double>(grid_n) * grid_n));
        }
        return {worst_fraction < 1e-3,
                "worst membership disagreement fraction " + fmt(worst_fraction) + " over " +
                    std::to_string(n_configs) + " configurations"};
    });

    criterion(10, "circumradius bound domination + u/v crossing",
              [&]() -> std::pair<bool, std::string> {
                  bool ok = true;
                  std::string detail;

                  const std::vector<double> r_poisson{0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 2.0};
                  SurvivalParams sp;
                  sp.n_samples = 100000;
                  sp.seed = opts_.seed;
                  sp.threads = opts_.threads;
                  const auto pois =
                      circumscribed_radius_survival(ProcessModel::poisson(1.0), r_poisson, sp);
                  for (std::size_t i = 0; i < r_poisson.size(); ++i) {
                      const auto bound = calka_poisson_bound(1.0, r_poisson[i]);
                      const double p = pois.survival[i];
                      const double se = std::sqrt(p * (1.0 - p) /
                                                  static_cast<double>(std::max<std::uint64_t>(
                                                      pois.n_valid, 1)));
                      if (bound.valid && p - 3.0 * se > bound.value) {
                          ok = false;
                          detail += "poisson r=" + fmt(r_poisson[i]) + " p=" + fmt(p) + " > " +
                                    fmt(bound.value) + "; ";
                      }
                  }
                  if (pois.n_discarded >
                      static_cast<std::uint64_t>(1e-4 * static_cast<double>(sp.n_samples))) {
                      ok = false;
                      detail += "poisson discard rate too high; ";
                  }

                  const std::vector<double> r_gin{2.5, 2.75, 3.0, 3.25, 3.5};
                  SurvivalParams sg;
                  sg.n_samples = 10000;
                  sg.seed = opts_.seed;
                  sg.threads = opts_.threads;
                  const auto gin = circumscribed_radius_survival(ProcessModel::ginibre(), r_gin, sg);
                  for (std::size_t i = 0; i < r_gin.size(); ++i) {
                      const double bound = ginibre_petal_bound(r_gin[i]);
                      const double p = gin.survival[i];
                      const double se = std::sqrt(
                          p * (1.0 - p) /
                          static_cast<double>(std::max<std::uint64_t>(gin.n_valid, 1)));
                      if (p - 3.0 * se > bound) {
                          ok = false;
                          detail += "ginibre r=" + fmt(r_gin[i]) + " p=" + fmt(p) + " > " +
                                    fmt(bound) + "; ";
                      }
                  }
                  if (gin.n_discarded >
                      static_cast<std::uint64_t>(1e-4 * static_cast<double>(sg.n_samples))) {
                      ok = false;
                      detail += "ginibre discard rate too high; ";
                  }

                  const double crossing = ginibre_petal_crossing();
                  if (std::abs(crossing - 0.5276) > 1e-3) {
                      ok = false;
                      detail += "u/v crossing at " + fmt(crossing) + "; ";
                  }
                  if (ok)
                      detail = "empirical survival below Calka (Poisson, 1e5 cells) and Eq.-11 "
                               "bound (Ginibre, 1e4 cells); crossing r*=" +
                               fmt(crossing);
                  return {ok, detail};
              });

    criterion(11, "Ginibre kernel L2 identity", [&]() -> std::pair<bool, std::string> {
        const auto res = ginibre_kernel_l2(6.0);
        const double inv_pi = 1.0 / kPi;
        const bool ok =
            std::abs(res.closed_form - inv_pi) <= 1e-10 && std::abs(res.quadrature - inv_pi) <= 1e-10;
        return {ok, "closed=" + fmt(res.closed_form) + " quad=" + fmt(res.quadrature) + " vs 1/pi=" +
                        fmt(inv_pi)};
    });

    criterion(12, "lattice counterexample", [&]() -> std::pair<bool, std::string> {
        const double a = 1.5;
        const std::vector<std::uint64_t> levels{1000, 10000, 100000};
        const std::vector<int> ks{1, 2, 5};
        const auto report = condition_a_report(ProcessModel::lattice_mix(a), ks, levels,
                                               opts_.seed, opts_.threads);
        const auto& m = report.cell_radius_sq.means;
        bool grows = m.size() == 3;
        for (std::size_t i = 0; i + 1 < m.size(); ++i)
            grows = grows && m[i + 1] > 1.25 * m[i];

        const auto mc = lattice_palm_identity_mc(a, 100000, opts_.seed, opts_.threads);
        const double quad = lattice_palm_identity_quad(a);
        const bool identity_ok = std::abs(mc.mean - quad) <= 3.0 * mc.std_error;

        const bool ok = grows && identity_ok && report.analytic_infinite;
        std::string detail = "R(o)^2 means: ";
        for (const double v : m)
            detail += fmt(v) + " ";
        detail += "(>25%/decade " + std::string(grows ? "yes" : "NO") + "); palm identity mc=" +
                  fmt(mc.mean) + "+-" + fmt(mc.std_error) + " quad=" + fmt(quad);
        return {ok, detail};
    });

    criterion(13, "Kostlan identities", [&]() -> std::pair<bool, std::string> {
        double sum = 0.0;
        for (int i = 1; i <= 100; ++i)
            sum += boost::math::gamma_p(static_cast<double>(i), 4.0);
        const bool stationary_ok = std::abs(sum - 4.0) <= 1e-8;

        // Palm variant: mean #{radii <= r} vs r^2 - (1 - e^{-r^2}).
        const double r = 2.0;
        const double expect = r * r - (1.0 - std::exp(-r * r));
        const std::uint64_t n = 100000;
        const std::uint32_t salt = stream_salt("kostlan-palm-count");
        struct Partial {
            double sum = 0.0, sum_sq = 0.0;
        };
        const auto parts = run_blocks<Partial>(
            n, 1000, opts_.threads, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
                Partial p;
                std::vector<double> sq(40);
                for (std::uint64_t rep = b; rep < e; ++rep) {
                    Philox rng(opts_.seed, replicate_stream(salt, rep));
                    fill_ginibre_sq_radii(true, sq, rng);
                    double count = 0.0;
                    for (const double s : sq)
                        if (s <= r * r)
                            count += 1.0;
                    p.sum += count;
                    p.sum_sq += count * count;
                }
                return p;
            });
        Partial tot;
        for (const auto& p : parts) {
            tot.sum += p.sum;
            tot.sum_sq += p.sum_sq;
        }
        const auto mv = mean_and_se(tot.sum, tot.sum_sq, n);
        const bool palm_ok = std::abs(mv.mean - expect) <= 3.0 * mv.std_error;
        return {stationary_ok && palm_ok,
                "sum P(Gamma(i,1)<=4)=" + fmt(sum) + "; palm count mean=" + fmt(mv.mean) + "+-" +
                    fmt(mv.std_error) + " vs " + fmt(expect)};
    });

    criterion(14, "determinism across worker counts", [&]() -> std::pair<bool, std::string> {
        auto artifacts = [&](int threads) {
            std::ostringstream out;
            McParams mc{20000, 100, opts_.seed, threads};
            const auto grid = log_spaced(10.0, 1e4, 10);
            const auto curve = estimate_sir_tail(ProcessModel::poisson(1.0),
                                                 FadingSpec::rayleigh(), 2.0, grid, mc);
            write_tail_csv(out, curve);
            write_tail_json(out, curve);

            McParams pc{20000, 100, opts_.seed, threads};
            const auto palm = estimate_palm_constant(ProcessModel::ginibre(),
                                                     FadingSpec::nakagami(2.0), 3.0, pc);
            write_constant_json(out, {palm});

            SurvivalParams sp;
            sp.n_samples = 2000;
            sp.seed = opts_.seed;
            sp.threads = threads;
            const std::vector<double> rg{0.5, 1.0, 1.5};
            const auto surv =
                circumscribed_radius_survival(ProcessModel::poisson(1.0), rg, sp);
            write_survival_csv(out, surv, ProcessModel::poisson(1.0));

            const std::vector<std::uint64_t> levels{1000, 2000};
            const std::vector<int> ks{1, 2};
            const auto rep = condition_a_report(ProcessModel::lattice_mix(1.5), ks, levels,
                                                opts_.seed, threads);
            const auto mv = lattice_palm_identity_mc(1.5, 2000, opts_.seed, threads);
            write_condition_a_json(out, rep, ProcessModel::lattice_mix(1.5), mv.mean,
                                   lattice_palm_identity_quad(1.5), mv.std_error);
            return out.str();
        };
        const std::string one = artifacts(1);
        const std::string four = artifacts(4);
        const bool ok = one == four && !one.empty();
        return {ok, ok ? "tail/constant/bounds/counterexample artifacts byte-identical for 1 vs 4 "
                         "workers"
                       : "artifacts differ between worker counts"};
    });

    return results_;
}

} // namespace

std::vector<CriterionResult> run_all(const Options& opts, std::ostream& log)
{
    Runner runner(opts, log);
    return runner.run();
}

bool all_passed(const std::vector<CriterionResult>& results)
{
    if (results.empty())
        return false;
    for (const auto& r : results)
        if (!r.pass)
            return false;
    return true;
}

} // namespace sirtail::acceptance
