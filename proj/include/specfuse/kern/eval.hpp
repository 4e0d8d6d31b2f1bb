#pragma once

#include <cmath>
#include <cstddef>

#include "specfuse/kern/plans.hpp"

namespace specfuse::kern {

// Per-pixel plan evaluation in double precision. These routines are the
// reference semantics for every resampling path: the f32 cube executors
// (scalar and SIMD) perform exactly this arithmetic per pixel, so their
// outputs are bit-identical to evaluating a pixel through here.

inline constexpr double kSixth = 1.0 / 6.0;

inline void eval_linear(const LinearPlan& p, const double* y, double* out) {
    for (std::size_t k = 0; k < p.seg.size(); ++k) {
        if (p.knot_idx[k] >= 0) {
            out[k] = y[p.knot_idx[k]];
            continue;
        }
        const std::size_t i = static_cast<std::size_t>(p.seg[k]);
        out[k] = y[i] + p.t[k] * (y[i + 1] - y[i]);
    }
}

inline void eval_quadratic(const QuadraticPlan& p, const double* y, double* out) {
    for (std::size_t k = 0; k < p.win.size(); ++k) {
        if (p.knot_idx[k] >= 0) {
            out[k] = y[p.knot_idx[k]];
            continue;
        }
        const std::size_t w = static_cast<std::size_t>(p.win[k]);
        out[k] = (y[w] * p.l0[k] + y[w + 1] * p.l1[k]) + y[w + 2] * p.l2[k];
    }
}

struct CubicWork {
    std::vector<double> delta;   // secant slopes, nsrc-1
    std::vector<double> rhs;     // interior right-hand side, nsrc-2
    std::vector<double> moments; // second derivatives at the knots, nsrc
    std::vector<double> cb, cc, cd; // piece coefficients, nsrc-1

    void resize(std::size_t nsrc) {
        delta.resize(nsrc - 1);
        rhs.resize(nsrc - 2);
        moments.resize(nsrc);
        cb.resize(nsrc - 1);
        cc.resize(nsrc - 1);
        cd.resize(nsrc - 1);
    }
};

// Solves the prefactored moment system for one pixel and fills the piece
// coefficients (shifted basis u = x - x_i): S_i(u) = y_i + u(b + u(c + u d)).
inline void cubic_solve(const CubicPlan& p, const double* y, CubicWork& w) {
    const std::size_t n = p.nsrc;
    const std::size_t m = n - 2;

    for (std::size_t i = 0; i + 1 < n; ++i)
        w.delta[i] = (y[i + 1] - y[i]) * p.inv_h[i];

    for (std::size_t j = 0; j < m; ++j)
        w.rhs[j] = (w.delta[j + 1] - w.delta[j]) * 6.0;
    for (std::size_t j = 1; j < m; ++j)
        w.rhs[j] = w.rhs[j] - p.elim[j] * w.rhs[j - 1];

    w.moments[m] = w.rhs[m - 1] * p.inv_diag[m - 1]; // knot index m = (m-1)+1
    for (std::size_t j = m - 1; j-- > 0;)
        w.moments[j + 1] = (w.rhs[j] - p.upper[j] * w.moments[j + 2]) * p.inv_diag[j];

    const double mi1 = w.moments[1];
    const double mi2 = (m >= 2) ? w.moments[2] : 0.0;
    const double ml1 = w.moments[n - 2];
    const double ml2 = (m >= 2) ? w.moments[n - 3] : 0.0;
    w.moments[0] = p.b0_1 * mi1 + p.b0_2 * mi2;
    w.moments[n - 1] = p.bn_1 * ml1 + p.bn_2 * ml2;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double m0 = w.moments[i];
        const double m1 = w.moments[i + 1];
        w.cc[i] = m0 * 0.5;
        w.cd[i] = (m1 - m0) * p.inv_6h[i];
        w.cb[i] = w.delta[i] - p.h[i] * ((2.0 * m0 + m1) * kSixth);
    }
}

inline void eval_cubic(const CubicPlan& p, const double* y, double* out, CubicWork& w) {
    cubic_solve(p, y, w);
    for (std::size_t k = 0; k < p.seg.size(); ++k) {
        if (p.knot_idx[k] >= 0) {
            out[k] = y[p.knot_idx[k]];
            continue;
        }
        const std::size_t i = static_cast<std::size_t>(p.seg[k]);
        const double u = p.u[k];
        out[k] = y[i] + u * (w.cb[i] + u * (w.cc[i] + u * w.cd[i]));
    }
}

struct PchipWork {
    std::vector<double> delta; // nsrc-1
    std::vector<double> deriv; // nsrc

    void resize(std::size_t nsrc) {
        delta.resize(nsrc - 1);
        deriv.resize(nsrc);
    }
};

// One-sided three-point endpoint derivative, clamped so the interpolant
// stays shape preserving near the boundary.
inline double pchip_edge(double h0, double h1, double s0, double s1) {
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0)
        return 0.0;
    if (s0 * s1 < 0.0 && std::abs(d) > 3.0 * std::abs(s0))
        return 3.0 * s0;
    return d;
}

inline void pchip_derivatives_inplace(const PchipPlan& p, const double* y, PchipWork& w) {
    const std::size_t n = p.nsrc;
    for (std::size_t i = 0; i + 1 < n; ++i)
        w.delta[i] = (y[i + 1] - y[i]) * p.inv_h[i];

    if (n == 2) {
        w.deriv[0] = w.delta[0];
        w.deriv[1] = w.delta[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double s0 = w.delta[i - 1];
        const double s1 = w.delta[i];
        const double prod = s0 * s1;
        if (prod > 0.0) {
            const double q0 = p.w1[i - 1] / s0;
            const double q1 = p.w2[i - 1] / s1;
            w.deriv[i] = p.wsum[i - 1] / (q0 + q1);
        } else {
            w.deriv[i] = 0.0;
        }
    }
    w.deriv[0] = pchip_edge(p.h[0], p.h[1], w.delta[0], w.delta[1]);
    w.deriv[n - 1] = pchip_edge(p.h[n - 2], p.h[n - 3], w.delta[n - 2], w.delta[n - 3]);
}

inline void eval_pchip(const PchipPlan& p, const double* y, double* out, PchipWork& w) {
    pchip_derivatives_inplace(p, y, w);
    for (std::size_t k = 0; k < p.seg.size(); ++k) {
        if (p.knot_idx[k] >= 0) {
            out[k] = y[p.knot_idx[k]];
            continue;
        }
        const std::size_t i = static_cast<std::size_t>(p.seg[k]);
        out[k] = (y[i] * p.b00[k] + y[i + 1] * p.b01[k]) +
                 (w.deriv[i] * p.b10[k] + w.deriv[i + 1] * p.b11[k]);
    }
}

} // namespace specfuse::kern
