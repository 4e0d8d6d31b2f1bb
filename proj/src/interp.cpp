#include "specfuse/interp.hpp"

#include <algorithm>
#include <cmath>

#include "specfuse/kern/eval.hpp"
#include "specfuse/kern/kernels.hpp"
#include "specfuse/parallel.hpp"

namespace specfuse {
namespace {

void check_abscissae(std::span<const double> xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]))
            throw_user("abscissa[" + std::to_string(i) + "] is not finite");
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw_user("abscissae must be strictly increasing; violation at index " +
                       std::to_string(i));
    }
}

void check_arity(std::span<const double> xs, InterpolationMethod m) {
    if (xs.size() < m.min_points())
        throw_user(m.name() + " interpolation requires at least " +
                   std::to_string(m.min_points()) + " points, got " + std::to_string(xs.size()));
}

void check_queries(std::span<const double> xs, std::span<const double> queries) {
    const double lo = xs.front();
    const double hi = xs.back();
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const double q = queries[k];
        if (!std::isfinite(q))
            throw_user("query[" + std::to_string(k) + "] is not finite");
        if (q < lo || q > hi)
            throw_user("query " + std::to_string(q) + " lies outside the source span [" +
                       std::to_string(lo) + ", " + std::to_string(hi) +
                       "]: extrapolation is not supported");
    }
}

// Bracketing interval: xs[i] <= q <= xs[i+1], clamped to [0, n-2].
std::size_t find_interval(std::span<const double> xs, double q) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), q);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    if (i > 0)
        --i;
    if (i > xs.size() - 2)
        i = xs.size() - 2;
    return i;
}

std::int32_t knot_index(std::span<const double> xs, double q) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), q);
    if (it != xs.end() && *it == q)
        return static_cast<std::int32_t>(it - xs.begin());
    return -1;
}

std::vector<double> eval_plan_double(InterpolationMethod method, std::span<const double> xs,
                                     std::span<const double> ys,
                                     std::span<const double> queries);

} // namespace

InterpolationMethod InterpolationMethod::parse(std::string_view name) {
    if (name == "linear")
        return linear();
    if (name == "quadratic")
        return quadratic();
    if (name == "cubic")
        return cubic();
    if (name == "pchip")
        return pchip();
    throw_user("unknown method '" + std::string(name) + "' (expected linear|quadratic|cubic|pchip)");
}

std::string InterpolationMethod::name() const {
    switch (kind) {
    case Kind::Linear: return "linear";
    case Kind::Quadratic: return "quadratic";
    case Kind::CubicSpline: return "cubic";
    case Kind::Pchip: return "pchip";
    }
    return "?";
}

std::size_t InterpolationMethod::min_points() const {
    switch (kind) {
    case Kind::Linear: return 2;
    case Kind::Quadratic: return 3;
    case Kind::CubicSpline: return boundary == SplineBoundary::NotAKnot ? 4 : 3;
    case Kind::Pchip: return 2;
    }
    return 2;
}

double SplineCoefficients::eval(double x) const {
    if (x < knots.front() || x > knots.back())
        throw_user("spline evaluation at " + std::to_string(x) + " outside the knot span");
    std::span<const double> xs(knots.nm);
    const std::size_t i = find_interval(xs, x);
    return eval_piece(i, x - knots[i]);
}

kern::LinearPlan make_linear_plan(std::span<const double> xs, std::span<const double> queries) {
    if (xs.size() < 2)
        throw_user("linear interpolation requires at least 2 points");
    check_abscissae(xs);
    check_queries(xs, queries);
    kern::LinearPlan plan;
    plan.nsrc = xs.size();
    plan.knot_idx.resize(queries.size());
    plan.seg.resize(queries.size());
    plan.t.resize(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const double q = queries[k];
        plan.knot_idx[k] = knot_index(xs, q);
        const std::size_t i = find_interval(xs, q);
        plan.seg[k] = static_cast<std::int32_t>(i);
        plan.t[k] = (q - xs[i]) / (xs[i + 1] - xs[i]);
    }
    return plan;
}

kern::QuadraticPlan make_quadratic_plan(std::span<const double> xs,
                                        std::span<const double> queries) {
    if (xs.size() < 3)
        throw_user("quadratic interpolation requires at least 3 points");
    check_abscissae(xs);
    check_queries(xs, queries);
    kern::QuadraticPlan plan;
    plan.nsrc = xs.size();
    plan.knot_idx.resize(queries.size());
    plan.win.resize(queries.size());
    plan.l0.resize(queries.size());
    plan.l1.resize(queries.size());
    plan.l2.resize(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const double q = queries[k];
        plan.knot_idx[k] = knot_index(xs, q);
        const std::size_t w = select_quadratic_window(xs, q);
        plan.win[k] = static_cast<std::int32_t>(w);
        const double x0 = xs[w];
        const double x1 = xs[w + 1];
        const double x2 = xs[w + 2];
        plan.l0[k] = ((q - x1) * (q - x2)) / ((x0 - x1) * (x0 - x2));
        plan.l1[k] = ((q - x0) * (q - x2)) / ((x1 - x0) * (x1 - x2));
        plan.l2[k] = ((q - x0) * (q - x1)) / ((x2 - x0) * (x2 - x1));
    }
    return plan;
}

kern::CubicPlan make_cubic_plan(std::span<const double> xs, std::span<const double> queries,
                                SplineBoundary boundary) {
    check_arity(xs, InterpolationMethod::cubic(boundary));
    check_abscissae(xs);
    check_queries(xs, queries);
    kern::CubicPlan plan;
    const std::size_t n = xs.size();
    plan.nsrc = n;

    plan.h.resize(n - 1);
    plan.inv_h.resize(n - 1);
    plan.inv_6h.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        plan.h[i] = xs[i + 1] - xs[i];
        plan.inv_h[i] = 1.0 / plan.h[i];
        plan.inv_6h[i] = 1.0 / (6.0 * plan.h[i]);
    }

    // Moment system over the interior knots. The two boundary closures
    // differ only in the first/last row and in how the end moments are
    // recovered afterwards.
    const std::size_t m = n - 2;
    std::vector<double> sub(m), diag(m), up(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = j + 1;
        sub[j] = plan.h[i - 1];
        diag[j] = 2.0 * (plan.h[i - 1] + plan.h[i]);
        up[j] = plan.h[i];
    }
    if (boundary == SplineBoundary::NotAKnot) {
        const double r = plan.h[0] / plan.h[1];
        diag[0] += plan.h[0] * (1.0 + r);
        up[0] -= plan.h[0] * r;
        plan.b0_1 = 1.0 + r;
        plan.b0_2 = -r;

        const double s = plan.h[n - 2] / plan.h[n - 3];
        diag[m - 1] += plan.h[n - 2] * (1.0 + s);
        sub[m - 1] -= plan.h[n - 2] * s;
        plan.bn_1 = 1.0 + s;
        plan.bn_2 = -s;
    }

    plan.elim.assign(m, 0.0);
    plan.inv_diag.assign(m, 0.0);
    plan.upper = up;
    double pivot = diag[0];
    plan.inv_diag[0] = 1.0 / pivot;
    for (std::size_t j = 1; j < m; ++j) {
        plan.elim[j] = sub[j] * plan.inv_diag[j - 1];
        pivot = diag[j] - plan.elim[j] * up[j - 1];
        if (pivot == 0.0 || !std::isfinite(pivot))
            throw_internal("singular tridiagonal system in cubic spline fit");
        plan.inv_diag[j] = 1.0 / pivot;
    }

    plan.knot_idx.resize(queries.size());
    plan.seg.resize(queries.size());
    plan.u.resize(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const double q = queries[k];
        plan.knot_idx[k] = knot_index(xs, q);
        const std::size_t i = find_interval(xs, q);
        plan.seg[k] = static_cast<std::int32_t>(i);
        plan.u[k] = q - xs[i];
    }
    return plan;
}

kern::PchipPlan make_pchip_plan(std::span<const double> xs, std::span<const double> queries) {
    if (xs.size() < 2)
        throw_user("pchip interpolation requires at least 2 points");
    check_abscissae(xs);
    check_queries(xs, queries);
    kern::PchipPlan plan;
    const std::size_t n = xs.size();
    plan.nsrc = n;

    plan.h.resize(n - 1);
    plan.inv_h.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        plan.h[i] = xs[i + 1] - xs[i];
        plan.inv_h[i] = 1.0 / plan.h[i];
    }
    if (n >= 3) {
        plan.w1.resize(n - 2);
        plan.w2.resize(n - 2);
        plan.wsum.resize(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            plan.w1[i - 1] = 2.0 * plan.h[i] + plan.h[i - 1];
            plan.w2[i - 1] = plan.h[i] + 2.0 * plan.h[i - 1];
            plan.wsum[i - 1] = plan.w1[i - 1] + plan.w2[i - 1];
        }
    }

    plan.knot_idx.resize(queries.size());
    plan.seg.resize(queries.size());
    plan.b00.resize(queries.size());
    plan.b01.resize(queries.size());
    plan.b10.resize(queries.size());
    plan.b11.resize(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const double q = queries[k];
        plan.knot_idx[k] = knot_index(xs, q);
        const std::size_t i = find_interval(xs, q);
        plan.seg[k] = static_cast<std::int32_t>(i);
        const double h = plan.h[i];
        const double t = (q - xs[i]) / h;
        const double omt = 1.0 - t;
        plan.b00[k] = (1.0 + 2.0 * t) * omt * omt;
        plan.b01[k] = t * t * (3.0 - 2.0 * t);
        plan.b10[k] = h * (t * omt * omt);
        plan.b11[k] = h * (t * t * (t - 1.0));
    }
    return plan;
}

std::size_t select_quadratic_window(std::span<const double> xs, double query) {
    if (xs.size() < 3)
        throw_user("quadratic window selection requires at least 3 points");
    if (query < xs.front() || query > xs.back())
        throw_user("query " + std::to_string(query) + " lies outside the source span [" +
                   std::to_string(xs.front()) + ", " + std::to_string(xs.back()) +
                   "]: extrapolation is not supported");
    const std::size_t n = xs.size();
    const std::size_t i = find_interval(xs, query);
    if (i == 0)
        return 0; // left edge: extend right
    if (i == n - 2)
        return n - 3; // right edge: extend left
    const double dl = query - xs[i - 1];
    const double dr = xs[i + 2] - query;
    return dl <= dr ? i - 1 : i; // tie extends left
}

SplineCoefficients fit_cubic_spline(std::span<const double> xs, std::span<const double> ys,
                                    SplineBoundary boundary) {
    check_abscissae(xs);
    check_arity(xs, InterpolationMethod::cubic(boundary));
    if (ys.size() != xs.size())
        throw_user("ordinate count " + std::to_string(ys.size()) +
                   " does not match abscissa count " + std::to_string(xs.size()));

    kern::CubicPlan plan = make_cubic_plan(xs, {}, boundary);
    kern::CubicWork work;
    work.resize(xs.size());
    kern::cubic_solve(plan, ys.data(), work);

    SplineCoefficients out;
    out.knots = WavelengthGrid(std::vector<double>(xs.begin(), xs.end()));
    out.a.assign(ys.begin(), ys.end() - 1);
    out.b = work.cb;
    out.c = work.cc;
    out.d = work.cd;
    return out;
}

std::vector<double> pchip_derivatives(std::span<const double> xs, std::span<const double> ys) {
    check_abscissae(xs);
    check_arity(xs, InterpolationMethod::pchip());
    if (ys.size() != xs.size())
        throw_user("ordinate count " + std::to_string(ys.size()) +
                   " does not match abscissa count " + std::to_string(xs.size()));

    kern::PchipPlan plan = make_pchip_plan(xs, {});
    kern::PchipWork work;
    work.resize(xs.size());
    kern::pchip_derivatives_inplace(plan, ys.data(), work);
    return work.deriv;
}

namespace {

std::vector<double> eval_plan_double(InterpolationMethod method, std::span<const double> xs,
                                     std::span<const double> ys,
                                     std::span<const double> queries) {
    std::vector<double> out(queries.size());
    switch (method.kind) {
    case InterpolationMethod::Kind::Linear: {
        const auto plan = make_linear_plan(xs, queries);
        kern::eval_linear(plan, ys.data(), out.data());
        break;
    }
    case InterpolationMethod::Kind::Quadratic: {
        const auto plan = make_quadratic_plan(xs, queries);
        kern::eval_quadratic(plan, ys.data(), out.data());
        break;
    }
    case InterpolationMethod::Kind::CubicSpline: {
        const auto plan = make_cubic_plan(xs, queries, method.boundary);
        kern::CubicWork work;
        work.resize(xs.size());
        kern::eval_cubic(plan, ys.data(), out.data(), work);
        break;
    }
    case InterpolationMethod::Kind::Pchip: {
        const auto plan = make_pchip_plan(xs, queries);
        kern::PchipWork work;
        work.resize(xs.size());
        kern::eval_pchip(plan, ys.data(), out.data(), work);
        break;
    }
    }
    return out;
}

} // namespace

std::vector<double> interpolate_1d(std::span<const double> xs, std::span<const double> ys,
                                   InterpolationMethod method,
                                   std::span<const double> queries) {
    check_abscissae(xs);
    check_arity(xs, method);
    if (ys.size() != xs.size())
        throw_user("ordinate count " + std::to_string(ys.size()) +
                   " does not match abscissa count " + std::to_string(xs.size()));
    check_queries(xs, queries);
    return eval_plan_double(method, xs, ys, queries);
}

Interpolator1D::Interpolator1D(std::span<const double> xs, InterpolationMethod method,
                               std::span<const double> queries)
    : method_(method), nsrc_(xs.size()), nq_(queries.size()) {
    check_abscissae(xs);
    check_arity(xs, method);
    switch (method_.kind) {
    case InterpolationMethod::Kind::Linear:
        lin_ = make_linear_plan(xs, queries);
        break;
    case InterpolationMethod::Kind::Quadratic:
        quad_ = make_quadratic_plan(xs, queries);
        break;
    case InterpolationMethod::Kind::CubicSpline:
        cubic_ = make_cubic_plan(xs, queries, method_.boundary);
        cwork_.resize(nsrc_);
        break;
    case InterpolationMethod::Kind::Pchip:
        pchip_ = make_pchip_plan(xs, queries);
        pwork_.resize(nsrc_);
        break;
    }
}

void Interpolator1D::eval(const double* ys, double* out) {
    switch (method_.kind) {
    case InterpolationMethod::Kind::Linear:
        kern::eval_linear(lin_, ys, out);
        break;
    case InterpolationMethod::Kind::Quadratic:
        kern::eval_quadratic(quad_, ys, out);
        break;
    case InterpolationMethod::Kind::CubicSpline:
        kern::eval_cubic(cubic_, ys, out, cwork_);
        break;
    case InterpolationMethod::Kind::Pchip:
        kern::eval_pchip(pchip_, ys, out, pwork_);
        break;
    }
}

SpectralPixel resample_pixel(const SpectralPixel& p, const WavelengthGrid& target,
                             InterpolationMethod method) {
    if (p.values.size() != p.grid.size())
        throw_user("pixel value count does not match its grid");
    SpectralPixel out;
    out.grid = target;
    out.values = interpolate_1d(p.grid.nm, p.values, method, target.nm);
    return out;
}

SpectralCube resample_cube(const SpectralCube& cube, const WavelengthGrid& target,
                           InterpolationMethod method, std::size_t workers) {
    std::span<const double> xs(cube.grid.nm);
    check_abscissae(xs);
    check_arity(xs, method);
    if (cube.data.size() != cube.pixels() * cube.bands())
        throw_user("cube data length does not match width*height*bands");
    check_queries(xs, target.nm);

    SpectralCube out;
    out.width = cube.width;
    out.height = cube.height;
    out.grid = target;
    out.data.resize(cube.pixels() * target.size());

    const std::size_t npix = cube.pixels();
    if (npix == 0 || target.size() == 0)
        return out;

    const float* src = cube.data.data();
    float* dst = out.data.data();
    const auto& kt = kern::active();
    const std::size_t nworkers = resolve_workers(workers);

    switch (method.kind) {
    case InterpolationMethod::Kind::Linear: {
        const auto plan = make_linear_plan(xs, target.nm);
        parallel_chunks(npix, nworkers, [&](std::size_t b, std::size_t e) {
            kt.resample_linear(plan, src, npix, dst, b, e);
        });
        break;
    }
    case InterpolationMethod::Kind::Quadratic: {
        const auto plan = make_quadratic_plan(xs, target.nm);
        parallel_chunks(npix, nworkers, [&](std::size_t b, std::size_t e) {
            kt.resample_quadratic(plan, src, npix, dst, b, e);
        });
        break;
    }
    case InterpolationMethod::Kind::CubicSpline: {
        const auto plan = make_cubic_plan(xs, target.nm, method.boundary);
        parallel_chunks(npix, nworkers, [&](std::size_t b, std::size_t e) {
            kt.resample_cubic(plan, src, npix, dst, b, e);
        });
        break;
    }
    case InterpolationMethod::Kind::Pchip: {
        const auto plan = make_pchip_plan(xs, target.nm);
        parallel_chunks(npix, nworkers, [&](std::size_t b, std::size_t e) {
            kt.resample_pchip(plan, src, npix, dst, b, e);
        });
        break;
    }
    }
    return out;
}

} // namespace specfuse
