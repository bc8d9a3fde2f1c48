#include "sirtail/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sirtail/parallel.hpp"

namespace sirtail {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSideEps = 1e-12;

double norm2(const std::array<double, 2>& p) { return p[0] * p[0] + p[1] * p[1]; }

struct ClipState {
    std::vector<std::array<double, 2>> v;
    std::vector<int> src;
};

// Cuts the polygon with {x : x.p <= |p|^2/2}, tagging the new chord edge
// with `cutter`. Returns false if nothing was cut.
bool clip_halfplane(ClipState& poly, const std::array<double, 2>& p, int cutter)
{
    const std::size_t m = poly.v.size();
    const double rhs = 0.5 * norm2(p);
    const double eps = kSideEps * std::max(1.0, rhs);

    static thread_local std::vector<double> d;
    d.resize(m);
    bool any_out = false;
    for (std::size_t j = 0; j < m; ++j) {
        d[j] = poly.v[j][0] * p[0] + poly.v[j][1] * p[1] - rhs;
        any_out = any_out || d[j] > eps;
    }
    if (!any_out)
        return false;

    ClipState out;
    out.v.reserve(m + 2);
    out.src.reserve(m + 2);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t jn = (j + 1) % m;
        const bool in_a = d[j] <= eps;
        const bool in_b = d[jn] <= eps;
        if (in_a) {
            out.v.push_back(poly.v[j]);
            out.src.push_back(poly.src[j]);
        }
        if (in_a != in_b && std::abs(d[j] - d[jn]) > 0.0) {
            const double t = d[j] / (d[j] - d[jn]);
            if (t > 0.0 && t < 1.0) {
                std::array<double, 2> x{poly.v[j][0] + t * (poly.v[jn][0] - poly.v[j][0]),
                                        poly.v[j][1] + t * (poly.v[jn][1] - poly.v[j][1])};
                out.v.push_back(x);
                out.src.push_back(in_a ? cutter : poly.src[j]);
            }
        }
    }
    // Drop degenerate duplicates left by near-tangent cuts.
    ClipState clean;
    clean.v.reserve(out.v.size());
    clean.src.reserve(out.src.size());
    for (std::size_t j = 0; j < out.v.size(); ++j) {
        const std::size_t jp = (j + out.v.size() - 1) % out.v.size();
        const double dx = out.v[j][0] - out.v[jp][0];
        const double dy = out.v[j][1] - out.v[jp][1];
        if (j > 0 && dx * dx + dy * dy < 1e-28)
            clean.src.back() = out.src[j]; // keep the later edge tag
        else {
            clean.v.push_back(out.v[j]);
            clean.src.push_back(out.src[j]);
        }
    }
    poly = std::move(clean);
    return true;
}

} // namespace

CellPolygon cell_of_origin(std::span<const std::array<double, 2>> points, double box_halfwidth)
{
    if (!(box_halfwidth > 0.0))
        throw std::invalid_argument("cell_of_origin: box halfwidth must be positive");

    ClipState poly;
    const double w = box_halfwidth;
    poly.v = {{-w, -w}, {w, -w}, {w, w}, {-w, w}};
    poly.src = {-1, -1, -1, -1};

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double na = norm2(points[a]);
        const double nb = norm2(points[b]);
        if (na != nb)
            return na < nb;
        if (points[a][0] != points[b][0])
            return points[a][0] < points[b][0];
        return points[a][1] < points[b][1];
    });

    for (const std::size_t idx : order) {
        const auto& p = points[idx];
        const double pn2 = norm2(p);
        if (pn2 <= 0.0)
            continue; // coincides with the origin; cannot cut
        double maxd2 = 0.0;
        for (const auto& v : poly.v)
            maxd2 = std::max(maxd2, norm2(v));
        if (pn2 > 4.0 * maxd2)
            break; // sorted ascending: no remaining point can cut
        clip_halfplane(poly, p, static_cast<int>(idx));
    }

    CellPolygon cell;
    cell.vertices = std::move(poly.v);
    cell.edge_source = std::move(poly.src);
    cell.bounded = true;
    double maxd2 = 0.0;
    for (const auto& v : cell.vertices)
        maxd2 = std::max(maxd2, norm2(v));
    for (const int s : cell.edge_source)
        if (s < 0)
            cell.bounded = false;
    cell.circumradius = std::sqrt(maxd2);
    return cell;
}

bool polygon_contains(const CellPolygon& cell, double x, double y, double eps)
{
    const std::size_t m = cell.vertices.size();
    for (std::size_t j = 0; j < m; ++j) {
        const auto& a = cell.vertices[j];
        const auto& b = cell.vertices[(j + 1) % m];
        const double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (cross < -eps)
            return false;
    }
    return true;
}

double petal_area(double r)
{
    if (r < 0.0)
        throw std::invalid_argument("petal_area: r must be nonnegative");
    return 2.0 * r * r * (kPi / 7.0 + std::sin(kPi / 7.0) * std::cos(3.0 * kPi / 7.0));
}

double ginibre_petal_u(double r)
{
    const double c = std::cos(2.0 * kPi / 7.0);
    const double a = 4.0 * r * r * c * c;
    return (a + std::exp(-a) - 1.0) / 7.0;
}

double ginibre_petal_v(double r)
{
    const double c = std::cos(kPi / 7.0);
    const double a = 4.0 * r * r * c * c;
    return petal_area(r) / kPi + (std::exp(-a) - 1.0) / 7.0;
}

double ginibre_petal_bound(double r)
{
    if (!(r > 0.0))
        throw std::invalid_argument("ginibre_petal_bound: r must be positive");
    const double e = std::max(ginibre_petal_u(r), ginibre_petal_v(r));
    return std::min(1.0, 7.0 * std::exp(-e));
}

double ginibre_petal_crossing()
{
    double lo = 0.3, hi = 0.8;
    auto f = [](double r) { return ginibre_petal_u(r) - ginibre_petal_v(r); };
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-10)
            break;
    }
    return 0.5 * (lo + hi);
}

BoundValue calka_poisson_bound(double lambda, double r)
{
    if (!(lambda > 0.0) || !(r > 0.0))
        throw std::invalid_argument("calka_poisson_bound: lambda and r must be positive");
    const double a = kPi * lambda * r * r;
    BoundValue b;
    b.value = 4.0 * a * std::exp(-a);
    b.valid = r * std::sqrt(lambda) >= 0.337;
    return b;
}

double generic_petal_bound(double lambda, double r)
{
    if (!(lambda > 0.0) || !(r > 0.0))
        throw std::invalid_argument("generic_petal_bound: lambda and r must be positive");
    const double e = std::max(0.0, lambda * petal_area(r) - 1.0);
    return std::min(1.0, 7.0 * std::exp(-e));
}

KernelL2Result ginibre_kernel_l2(double R)
{
    if (R < 0.0)
        throw std::invalid_argument("ginibre_kernel_l2: R must be nonnegative");
    KernelL2Result res;
    res.closed_form = (1.0 - std::exp(-R * R)) / kPi;
    if (R == 0.0) {
        res.quadrature = 0.0;
        res.gap = 0.0;
        return res;
    }
    using boost::math::quadrature::gauss_kronrod;
    auto inner = [&](double phi) {
        (void)phi; // |K(0,z)| is radial; integrate the 2D form anyway
        return gauss_kronrod<double, 31>::integrate(
            [&](double r) { return std::exp(-r * r) * r / (kPi * kPi); }, 0.0, R, 8, 1e-13);
    };
    res.quadrature = gauss_kronrod<double, 31>::integrate(inner, 0.0, 2.0 * kPi, 8, 1e-13);
    res.gap = std::abs(res.quadrature - res.closed_form);
    return res;
}

namespace {

double default_window(const ProcessModel& model)
{
    switch (model.kind()) {
    case ProcessModel::Kind::Poisson: return 6.0 / std::sqrt(model.lambda());
    case ProcessModel::Kind::Ginibre: return 8.0;
    case ProcessModel::Kind::LatticeMix: return 0.0;
    }
    return 0.0;
}

struct CellDrawContext {
    const ProcessModel& model;
    double window;
    const GinibrePalmBasis* basis;
};

// One replicate of the typical-cell circumscribed radius. Returns
// (radius, valid); invalid means the guard zone was breached.
std::pair<double, bool> draw_cell_radius(const CellDrawContext& ctx, Philox& rng)
{
    switch (ctx.model.kind()) {
    case ProcessModel::Kind::LatticeMix: {
        const auto draw = sample_lattice_palm(ctx.model.lattice_shape(), rng);
        return {lattice_cell_radius(draw.spacing), true};
    }
    case ProcessModel::Kind::Poisson: {
        const auto pts = sample_poisson_planar_palm(ctx.model.lambda(), ctx.window, rng);
        const auto cell = cell_of_origin(pts.points, ctx.window);
        const bool valid = cell.bounded && cell.circumradius <= 0.5 * ctx.window;
        return {cell.circumradius, valid};
    }
    case ProcessModel::Kind::Ginibre: {
        const auto pts = sample_ginibre_planar_palm(*ctx.basis, rng);
        const auto cell = cell_of_origin(pts.points, ctx.window);
        const bool valid = cell.bounded && cell.circumradius <= 0.5 * ctx.window;
        return {cell.circumradius, valid};
    }
    }
    return {0.0, false};
}

} // namespace

SurvivalCurve circumscribed_radius_survival(const ProcessModel& model,
                                            std::span<const double> r_grid,
                                            const SurvivalParams& params)
{
    SurvivalCurve curve;
    curve.r_grid.assign(r_grid.begin(), r_grid.end());
    curve.window = params.window > 0.0 ? params.window : default_window(model);

    const GinibrePalmBasis* basis = nullptr;
    GinibrePalmBasis local_basis(1.0, 0.5);
    if (model.kind() == ProcessModel::Kind::Ginibre) {
        local_basis = GinibrePalmBasis(curve.window, 1e-12);
        basis = &local_basis;
    }
    const CellDrawContext ctx{model, curve.window, basis};
    const std::uint32_t salt =
        stream_salt("survival:" + model.describe() + ":w=" + std::to_string(curve.window));

    struct Partial {
        std::vector<std::uint64_t> exceed;
        std::uint64_t valid = 0;
        std::uint64_t discarded = 0;
    };
    const auto partials = run_blocks<Partial>(
        params.n_samples, 1000, params.threads, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
            Partial part;
            part.exceed.assign(r_grid.size(), 0);
            for (std::uint64_t rep = b; rep < e; ++rep) {
                Philox rng(params.seed, replicate_stream(salt, rep));
                const auto [radius, valid] = draw_cell_radius(ctx, rng);
                if (!valid) {
                    ++part.discarded;
                    continue;
                }
                ++part.valid;
                for (std::size_t i = 0; i < r_grid.size(); ++i)
                    if (radius > r_grid[i])
                        ++part.exceed[i];
            }
            return part;
        });

    std::vector<std::uint64_t> exceed(r_grid.size(), 0);
    for (const auto& p : partials) {
        curve.n_valid += p.valid;
        curve.n_discarded += p.discarded;
        for (std::size_t i = 0; i < exceed.size(); ++i)
            exceed[i] += p.exceed[i];
    }
    curve.survival.resize(r_grid.size());
    curve.ci_low.resize(r_grid.size());
    curve.ci_high.resize(r_grid.size());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        curve.survival[i] =
            curve.n_valid ? static_cast<double>(exceed[i]) / static_cast<double>(curve.n_valid) : 0.0;
        const auto ci = wilson_interval(exceed[i], curve.n_valid);
        curve.ci_low[i] = ci.low;
        curve.ci_high[i] = ci.high;
    }
    return curve;
}

MeanVar lattice_palm_identity_mc(double a, std::uint64_t n, std::uint64_t seed, int threads)
{
    const std::uint32_t salt = stream_salt("latticepalm:a=" + std::to_string(a));
    struct Partial {
        double sum = 0.0, sum_sq = 0.0;
    };
    const auto parts =
        run_blocks<Partial>(n, 1000, threads, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
            Partial p;
            for (std::uint64_t rep = b; rep < e; ++rep) {
                Philox rng(seed, replicate_stream(salt, rep));
                const auto draw = sample_lattice_palm(a, rng);
                const double f = 1.0 / (1.0 + draw.spacing);
                p.sum += f;
                p.sum_sq += f * f;
            }
            return p;
        });
    Partial tot;
    for (const auto& p : parts) {
        tot.sum += p.sum;
        tot.sum_sq += p.sum_sq;
    }
    return mean_and_se(tot.sum, tot.sum_sq, n);
}

double lattice_palm_identity_quad(double a)
{
    // a * int_1^inf t^-(a+1)/(1+t) dt, mapped to u = 1/t on (0,1].
    using boost::math::quadrature::gauss_kronrod;
    const double integral = gauss_kronrod<double, 61>::integrate(
        [a](double u) { return std::pow(u, a) / (u + 1.0); }, 0.0, 1.0, 10, 1e-13);
    return a * integral;
}

std::vector<double> lattice_nearest_sq(double spacing, int k)
{
    if (k < 1)
        throw std::invalid_argument("lattice_nearest_sq: k must be positive");
    const int m = k + 1;
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>((2 * m + 1) * (2 * m + 1)));
    for (int i = -m; i <= m; ++i)
        for (int j = -m; j <= m; ++j) {
            if (i == 0 && j == 0)
                continue;
            d2.push_back(static_cast<double>(i) * i + spacing * spacing * j * j);
        }
    std::sort(d2.begin(), d2.end());
    d2.resize(static_cast<std::size_t>(k));
    return d2;
}

ConditionAReport condition_a_report(const ProcessModel& model, std::span<const int> ks,
                                    std::span<const std::uint64_t> levels, std::uint64_t seed,
                                    int threads, double window)
{
    ConditionAReport report;
    report.ks.assign(ks.begin(), ks.end());
    const std::uint64_t n = levels.empty() ? 0 : levels.back();
    const double w = window > 0.0 ? window : default_window(model);
    const int kmax = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());

    const GinibrePalmBasis* basis = nullptr;
    GinibrePalmBasis local_basis(1.0, 0.5);
    if (model.kind() == ProcessModel::Kind::Ginibre) {
        local_basis = GinibrePalmBasis(w, 1e-12);
        basis = &local_basis;
    }
    const CellDrawContext ctx{model, w, basis};
    const std::uint32_t salt = stream_salt("conditionA:" + model.describe());

    struct Partial {
        double rsq_sum = 0.0;
        std::vector<double> dist_sum;
        std::uint64_t valid = 0;
        std::uint64_t discarded = 0;
    };
    const std::uint64_t block = 1000;
    const auto partials = run_blocks<Partial>(
        n, block, threads, [&](std::uint64_t, std::uint64_t b, std::uint64_t e) {
            Partial part;
            part.dist_sum.assign(ks.size(), 0.0);
            std::vector<double> sq(static_cast<std::size_t>(kmax) + 40);
            for (std::uint64_t rep = b; rep < e; ++rep) {
                Philox rng(seed, replicate_stream(salt, rep));
                const auto [radius, valid] = draw_cell_radius(ctx, rng);
                if (valid) {
                    ++part.valid;
                    part.rsq_sum += radius * radius;
                }
                // Ordered squared distances, model-specific.
                if (kmax > 0) {
                    switch (model.kind()) {
                    case ProcessModel::Kind::Poisson:
                        fill_poisson_sq_radii(model.lambda(),
                                              std::span(sq).first(static_cast<std::size_t>(kmax)),
                                              rng);
                        for (std::size_t i = 0; i < ks.size(); ++i)
                            part.dist_sum[i] += sq[static_cast<std::size_t>(ks[i] - 1)];
                        break;
                    case ProcessModel::Kind::Ginibre: {
                        fill_ginibre_sq_radii(true, sq, rng);
                        std::vector<double> sorted(sq);
                        std::sort(sorted.begin(), sorted.end());
                        for (std::size_t i = 0; i < ks.size(); ++i)
                            part.dist_sum[i] += sorted[static_cast<std::size_t>(ks[i] - 1)];
                        break;
                    }
                    case ProcessModel::Kind::LatticeMix: {
                        const auto draw = sample_lattice_palm(model.lattice_shape(), rng);
                        const auto d2 = lattice_nearest_sq(draw.spacing, kmax);
                        for (std::size_t i = 0; i < ks.size(); ++i)
                            part.dist_sum[i] += d2[static_cast<std::size_t>(ks[i] - 1)];
                        break;
                    }
                    }
                }
            }
            return part;
        });

    report.cell_radius_sq.levels.assign(levels.begin(), levels.end());
    report.distance_sq.assign(ks.size(), RunningMeans{});
    for (auto& rm : report.distance_sq)
        rm.levels.assign(levels.begin(), levels.end());

    double rsq_acc = 0.0;
    std::uint64_t valid_acc = 0, discard_acc = 0, reps_acc = 0;
    std::vector<double> dist_acc(ks.size(), 0.0);
    std::size_t level_idx = 0;
    for (std::size_t b = 0; b < partials.size() && level_idx < levels.size(); ++b) {
        rsq_acc += partials[b].rsq_sum;
        valid_acc += partials[b].valid;
        discard_acc += partials[b].discarded;
        reps_acc = std::min<std::uint64_t>((b + 1) * block, n);
        for (std::size_t i = 0; i < ks.size(); ++i)
            dist_acc[i] += partials[b].dist_sum[i];
        while (level_idx < levels.size() && reps_acc >= levels[level_idx]) {
            report.cell_radius_sq.means.push_back(valid_acc ? rsq_acc / static_cast<double>(valid_acc)
                                                            : 0.0);
            for (std::size_t i = 0; i < ks.size(); ++i)
                report.distance_sq[i].means.push_back(dist_acc[i] / static_cast<double>(reps_acc));
            ++level_idx;
        }
    }
    report.discard_rate =
        n ? static_cast<double>(discard_acc) / static_cast<double>(n) : 0.0;

    report.analytic_infinite = model.kind() == ProcessModel::Kind::LatticeMix;
    const auto& means = report.cell_radius_sq.means;
    bool stab = means.size() >= 2, div = means.size() >= 2;
    for (std::size_t i = 0; i + 1 < means.size(); ++i) {
        const double ratio = means[i] > 0.0 ? means[i + 1] / means[i] : 0.0;
        stab = stab && std::abs(ratio - 1.0) < 0.05;
        div = div && ratio > 1.25;
    }
    report.verdict = stab ? "stabilizing" : (div ? "diverging" : "indeterminate");
    return report;
}

} // namespace sirtail
