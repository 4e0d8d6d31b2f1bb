#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specfuse/core.hpp"
#include "specfuse/kern/eval.hpp"
#include "specfuse/kern/plans.hpp"

namespace specfuse {

enum class SplineBoundary { NotAKnot, Natural };

/// One of the four 1-D interpolation kernels. CubicSpline carries its
/// boundary closure; the other kinds ignore it.
struct InterpolationMethod {
    enum class Kind { Linear, Quadratic, CubicSpline, Pchip };

    Kind kind = Kind::Linear;
    SplineBoundary boundary = SplineBoundary::NotAKnot;

    static InterpolationMethod linear() { return {Kind::Linear, SplineBoundary::NotAKnot}; }
    static InterpolationMethod quadratic() { return {Kind::Quadratic, SplineBoundary::NotAKnot}; }
    static InterpolationMethod cubic(SplineBoundary b = SplineBoundary::NotAKnot) {
        return {Kind::CubicSpline, b};
    }
    static InterpolationMethod pchip() { return {Kind::Pchip, SplineBoundary::NotAKnot}; }

    /// Accepts linear|quadratic|cubic|pchip (user error otherwise).
    static InterpolationMethod parse(std::string_view name);

    std::string name() const;
    std::size_t min_points() const;

    bool operator==(const InterpolationMethod&) const = default;
};

/// Piecewise cubic in the shifted local basis: on [knots[i], knots[i+1]],
/// S(x) = a[i] + u*(b[i] + u*(c[i] + u*d[i])) with u = x - knots[i].
struct SplineCoefficients {
    WavelengthGrid knots;
    std::vector<double> a, b, c, d;

    std::size_t intervals() const { return a.size(); }

    double eval_piece(std::size_t i, double u) const {
        return a[i] + u * (b[i] + u * (c[i] + u * d[i]));
    }
    double deriv1_piece(std::size_t i, double u) const {
        return b[i] + u * (2.0 * c[i] + u * 3.0 * d[i]);
    }
    double deriv2_piece(std::size_t i, double u) const {
        return 2.0 * c[i] + 6.0 * d[i] * u;
    }

    /// Evaluates S at x (must lie within the knot span).
    double eval(double x) const;
};

SplineCoefficients fit_cubic_spline(std::span<const double> xs, std::span<const double> ys,
                                    SplineBoundary boundary);

/// Shape-preserving knot derivatives (weighted harmonic mean of secant
/// slopes, zeroed at sign changes, clamped three-point rule at the ends).
std::vector<double> pchip_derivatives(std::span<const double> xs, std::span<const double> ys);

/// Start index of the 3-point window used by the quadratic kernel: the
/// bracketing interval extended toward whichever outer knot is closer,
/// ties and edges extending toward the interior.
std::size_t select_quadratic_window(std::span<const double> xs, double query);

std::vector<double> interpolate_1d(std::span<const double> xs, std::span<const double> ys,
                                   InterpolationMethod method,
                                   std::span<const double> queries);

/// Plans (xs -> queries) once and evaluates many ordinate sets against it.
/// eval() reuses internal scratch, so copy the evaluator per thread.
class Interpolator1D {
public:
    Interpolator1D(std::span<const double> xs, InterpolationMethod method,
                   std::span<const double> queries);

    std::size_t input_size() const { return nsrc_; }
    std::size_t output_size() const { return nq_; }

    /// ys: input_size() ordinates, out: output_size() results.
    void eval(const double* ys, double* out);

private:
    InterpolationMethod method_;
    std::size_t nsrc_ = 0, nq_ = 0;
    kern::LinearPlan lin_;
    kern::QuadraticPlan quad_;
    kern::CubicPlan cubic_;
    kern::PchipPlan pchip_;
    kern::CubicWork cwork_;
    kern::PchipWork pwork_;
};

SpectralPixel resample_pixel(const SpectralPixel& p, const WavelengthGrid& target,
                             InterpolationMethod method);

/// Resamples every pixel onto `target`. Work may be split across threads
/// (workers = 0 means SPECFUSE_WORKERS or hardware concurrency); the result
/// is identical for any worker count.
SpectralCube resample_cube(const SpectralCube& cube, const WavelengthGrid& target,
                           InterpolationMethod method, std::size_t workers = 0);

// Plan builders behind interpolate_1d/resample_cube; exposed for the kernel
// equivalence tests.
kern::LinearPlan make_linear_plan(std::span<const double> xs, std::span<const double> queries);
kern::QuadraticPlan make_quadratic_plan(std::span<const double> xs, std::span<const double> queries);
kern::CubicPlan make_cubic_plan(std::span<const double> xs, std::span<const double> queries,
                                SplineBoundary boundary);
kern::PchipPlan make_pchip_plan(std::span<const double> xs, std::span<const double> queries);

} // namespace specfuse
