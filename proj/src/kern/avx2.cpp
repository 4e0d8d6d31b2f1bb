// AVX2 kernel variants. Compiled with -mavx2 -mfma and selected at runtime
// behind a CPUID check; scalar remains the reference.
//
// The resample executors process 4 pixels per iteration in double lanes and
// run the exact per-pixel op sequence of eval.hpp, so their output matches
// the scalar path bit for bit (the whole build uses -ffp-contract=off and
// these kernels avoid fused ops). The dense-layer kernels do use FMA and
// lane-partial accumulators; they match scalar within tolerance only.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <vector>

#include "specfuse/kern/eval.hpp"
#include "specfuse/kern/kernels.hpp"

namespace specfuse::kern {
namespace {

inline __m256d load4_f32_as_f64(const float* p) {
    return _mm256_cvtps_pd(_mm_loadu_ps(p));
}

inline void store4_f64_as_f32(float* p, __m256d v) {
    _mm_storeu_ps(p, _mm256_cvtpd_ps(v));
}

// ---------------------------------------------------------------- resample

void resample_linear_avx2(const LinearPlan& plan, const float* src, std::size_t npix,
                          float* dst, std::size_t p0, std::size_t p1) {
    const std::size_t nq = plan.seg.size();
    std::size_t p = p0;
    for (; p + 4 <= p1; p += 4) {
        for (std::size_t k = 0; k < nq; ++k) {
            if (plan.knot_idx[k] >= 0) {
                const float* sp = src + static_cast<std::size_t>(plan.knot_idx[k]) * npix + p;
                store4_f64_as_f32(dst + k * npix + p, load4_f32_as_f64(sp));
                continue;
            }
            const std::size_t i = static_cast<std::size_t>(plan.seg[k]);
            const __m256d y0 = load4_f32_as_f64(src + i * npix + p);
            const __m256d y1 = load4_f32_as_f64(src + (i + 1) * npix + p);
            const __m256d t = _mm256_set1_pd(plan.t[k]);
            const __m256d r = _mm256_add_pd(y0, _mm256_mul_pd(t, _mm256_sub_pd(y1, y0)));
            store4_f64_as_f32(dst + k * npix + p, r);
        }
    }
    if (p < p1)
        scalar_table().resample_linear(plan, src, npix, dst, p, p1);
}

void resample_quadratic_avx2(const QuadraticPlan& plan, const float* src, std::size_t npix,
                             float* dst, std::size_t p0, std::size_t p1) {
    const std::size_t nq = plan.win.size();
    std::size_t p = p0;
    for (; p + 4 <= p1; p += 4) {
        for (std::size_t k = 0; k < nq; ++k) {
            if (plan.knot_idx[k] >= 0) {
                const float* sp = src + static_cast<std::size_t>(plan.knot_idx[k]) * npix + p;
                store4_f64_as_f32(dst + k * npix + p, load4_f32_as_f64(sp));
                continue;
            }
            const std::size_t w = static_cast<std::size_t>(plan.win[k]);
            const __m256d y0 = load4_f32_as_f64(src + w * npix + p);
            const __m256d y1 = load4_f32_as_f64(src + (w + 1) * npix + p);
            const __m256d y2 = load4_f32_as_f64(src + (w + 2) * npix + p);
            const __m256d a = _mm256_mul_pd(y0, _mm256_set1_pd(plan.l0[k]));
            const __m256d b = _mm256_mul_pd(y1, _mm256_set1_pd(plan.l1[k]));
            const __m256d c = _mm256_mul_pd(y2, _mm256_set1_pd(plan.l2[k]));
            store4_f64_as_f32(dst + k * npix + p, _mm256_add_pd(_mm256_add_pd(a, b), c));
        }
    }
    if (p < p1)
        scalar_table().resample_quadratic(plan, src, npix, dst, p, p1);
}

// 4-pixel-wide double scratch for the per-pixel solves
struct CubicWork4 {
    std::vector<__m256d> y, delta, rhs, moments, cb, cc, cd;
    void resize(std::size_t nsrc) {
        y.resize(nsrc);
        delta.resize(nsrc - 1);
        rhs.resize(nsrc - 2);
        moments.resize(nsrc);
        cb.resize(nsrc - 1);
        cc.resize(nsrc - 1);
        cd.resize(nsrc - 1);
    }
};

void resample_cubic_avx2(const CubicPlan& plan, const float* src, std::size_t npix,
                         float* dst, std::size_t p0, std::size_t p1) {
    const std::size_t n = plan.nsrc;
    const std::size_t m = n - 2;
    const std::size_t nq = plan.seg.size();
    CubicWork4 w;
    w.resize(n);

    const __m256d six = _mm256_set1_pd(6.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d sixth = _mm256_set1_pd(kSixth);

    std::size_t p = p0;
    for (; p + 4 <= p1; p += 4) {
        for (std::size_t b = 0; b < n; ++b)
            w.y[b] = load4_f32_as_f64(src + b * npix + p);

        for (std::size_t i = 0; i + 1 < n; ++i)
            w.delta[i] = _mm256_mul_pd(_mm256_sub_pd(w.y[i + 1], w.y[i]),
                                       _mm256_set1_pd(plan.inv_h[i]));

        for (std::size_t j = 0; j < m; ++j)
            w.rhs[j] = _mm256_mul_pd(_mm256_sub_pd(w.delta[j + 1], w.delta[j]), six);
        for (std::size_t j = 1; j < m; ++j)
            w.rhs[j] = _mm256_sub_pd(
                w.rhs[j], _mm256_mul_pd(_mm256_set1_pd(plan.elim[j]), w.rhs[j - 1]));

        w.moments[m] = _mm256_mul_pd(w.rhs[m - 1], _mm256_set1_pd(plan.inv_diag[m - 1]));
        for (std::size_t j = m - 1; j-- > 0;)
            w.moments[j + 1] = _mm256_mul_pd(
                _mm256_sub_pd(w.rhs[j], _mm256_mul_pd(_mm256_set1_pd(plan.upper[j]),
                                                      w.moments[j + 2])),
                _mm256_set1_pd(plan.inv_diag[j]));

        const __m256d mi1 = w.moments[1];
        const __m256d mi2 = (m >= 2) ? w.moments[2] : _mm256_setzero_pd();
        const __m256d ml1 = w.moments[n - 2];
        const __m256d ml2 = (m >= 2) ? w.moments[n - 3] : _mm256_setzero_pd();
        w.moments[0] = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(plan.b0_1), mi1),
                                     _mm256_mul_pd(_mm256_set1_pd(plan.b0_2), mi2));
        w.moments[n - 1] = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(plan.bn_1), ml1),
                                         _mm256_mul_pd(_mm256_set1_pd(plan.bn_2), ml2));

        for (std::size_t i = 0; i + 1 < n; ++i) {
            const __m256d m0 = w.moments[i];
            const __m256d m1 = w.moments[i + 1];
            w.cc[i] = _mm256_mul_pd(m0, half);
            w.cd[i] = _mm256_mul_pd(_mm256_sub_pd(m1, m0), _mm256_set1_pd(plan.inv_6h[i]));
            const __m256d t = _mm256_mul_pd(
                _mm256_add_pd(_mm256_mul_pd(two, m0), m1), sixth);
            w.cb[i] = _mm256_sub_pd(w.delta[i], _mm256_mul_pd(_mm256_set1_pd(plan.h[i]), t));
        }

        for (std::size_t k = 0; k < nq; ++k) {
            if (plan.knot_idx[k] >= 0) {
                store4_f64_as_f32(dst + k * npix + p,
                                  w.y[static_cast<std::size_t>(plan.knot_idx[k])]);
                continue;
            }
            const std::size_t i = static_cast<std::size_t>(plan.seg[k]);
            const __m256d u = _mm256_set1_pd(plan.u[k]);
            __m256d r = _mm256_add_pd(w.cc[i], _mm256_mul_pd(u, w.cd[i]));
            r = _mm256_add_pd(w.cb[i], _mm256_mul_pd(u, r));
            r = _mm256_add_pd(w.y[i], _mm256_mul_pd(u, r));
            store4_f64_as_f32(dst + k * npix + p, r);
        }
    }
    if (p < p1)
        scalar_table().resample_cubic(plan, src, npix, dst, p, p1);
}

struct PchipWork4 {
    std::vector<__m256d> y, delta, deriv;
    void resize(std::size_t nsrc) {
        y.resize(nsrc);
        delta.resize(nsrc - 1);
        deriv.resize(nsrc);
    }
};

void resample_pchip_avx2(const PchipPlan& plan, const float* src, std::size_t npix,
                         float* dst, std::size_t p0, std::size_t p1) {
    const std::size_t n = plan.nsrc;
    const std::size_t nq = plan.seg.size();
    PchipWork4 w;
    w.resize(n);
    const __m256d zero = _mm256_setzero_pd();

    std::size_t p = p0;
    for (; p + 4 <= p1; p += 4) {
        for (std::size_t b = 0; b < n; ++b)
            w.y[b] = load4_f32_as_f64(src + b * npix + p);
        for (std::size_t i = 0; i + 1 < n; ++i)
            w.delta[i] = _mm256_mul_pd(_mm256_sub_pd(w.y[i + 1], w.y[i]),
                                       _mm256_set1_pd(plan.inv_h[i]));

        if (n == 2) {
            w.deriv[0] = w.delta[0];
            w.deriv[1] = w.delta[0];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const __m256d s0 = w.delta[i - 1];
                const __m256d s1 = w.delta[i];
                const __m256d prod = _mm256_mul_pd(s0, s1);
                const __m256d mask = _mm256_cmp_pd(prod, zero, _CMP_GT_OQ);
                // lanes with prod <= 0 produce garbage here and are blended away
                const __m256d q0 = _mm256_div_pd(_mm256_set1_pd(plan.w1[i - 1]), s0);
                const __m256d q1 = _mm256_div_pd(_mm256_set1_pd(plan.w2[i - 1]), s1);
                const __m256d d =
                    _mm256_div_pd(_mm256_set1_pd(plan.wsum[i - 1]), _mm256_add_pd(q0, q1));
                w.deriv[i] = _mm256_blendv_pd(zero, d, mask);
            }
            // endpoint rule is branchy; evaluate it per lane with the shared
            // scalar helper so the result is identical by construction
            alignas(32) double s0v[4], s1v[4], d0v[4], d1v[4];
            _mm256_store_pd(s0v, w.delta[0]);
            _mm256_store_pd(s1v, w.delta[1]);
            _mm256_store_pd(d0v, w.delta[n - 2]);
            _mm256_store_pd(d1v, w.delta[n - 3]);
            alignas(32) double e0[4], e1[4];
            for (int lane = 0; lane < 4; ++lane) {
                e0[lane] = pchip_edge(plan.h[0], plan.h[1], s0v[lane], s1v[lane]);
                e1[lane] = pchip_edge(plan.h[n - 2], plan.h[n - 3], d0v[lane], d1v[lane]);
            }
            w.deriv[0] = _mm256_load_pd(e0);
            w.deriv[n - 1] = _mm256_load_pd(e1);
        }

        for (std::size_t k = 0; k < nq; ++k) {
            if (plan.knot_idx[k] >= 0) {
                store4_f64_as_f32(dst + k * npix + p,
                                  w.y[static_cast<std::size_t>(plan.knot_idx[k])]);
                continue;
            }
            const std::size_t i = static_cast<std::size_t>(plan.seg[k]);
            const __m256d a = _mm256_add_pd(
                _mm256_mul_pd(w.y[i], _mm256_set1_pd(plan.b00[k])),
                _mm256_mul_pd(w.y[i + 1], _mm256_set1_pd(plan.b01[k])));
            const __m256d b = _mm256_add_pd(
                _mm256_mul_pd(w.deriv[i], _mm256_set1_pd(plan.b10[k])),
                _mm256_mul_pd(w.deriv[i + 1], _mm256_set1_pd(plan.b11[k])));
            store4_f64_as_f32(dst + k * npix + p, _mm256_add_pd(a, b));
        }
    }
    if (p < p1)
        scalar_table().resample_pchip(plan, src, npix, dst, p, p1);
}

// --------------------------------------------------------------- reductions

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i)
        s += std::abs(a[i] - b[i]);
    return s;
}

void trapezoid_acc_avx2(double* acc, const float* lo, const float* hi, double half_width,
                        std::size_t n) {
    const __m256d hw = _mm256_set1_pd(half_width);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d a = load4_f32_as_f64(lo + j);
        const __m256d b = load4_f32_as_f64(hi + j);
        const __m256d cur = _mm256_loadu_pd(acc + j);
        _mm256_storeu_pd(acc + j,
                         _mm256_add_pd(cur, _mm256_mul_pd(hw, _mm256_add_pd(a, b))));
    }
    for (; j < n; ++j)
        acc[j] += half_width * (static_cast<double>(lo[j]) + static_cast<double>(hi[j]));
}

void ndvi_plane_avx2(const float* nir, const float* red, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d a = load4_f32_as_f64(nir + j);
        const __m256d b = load4_f32_as_f64(red + j);
        const __m256d num = _mm256_sub_pd(a, b);
        const __m256d den = _mm256_add_pd(a, b);
        const __m256d r = _mm256_div_pd(num, den);
        const __m256d mask = _mm256_cmp_pd(den, zero, _CMP_EQ_OQ);
        _mm256_storeu_pd(out + j, _mm256_blendv_pd(r, zero, mask));
    }
    for (; j < n; ++j) {
        const double num = static_cast<double>(nir[j]) - static_cast<double>(red[j]);
        const double den = static_cast<double>(nir[j]) + static_cast<double>(red[j]);
        out[j] = (den == 0.0) ? 0.0 : num / den;
    }
}

// ------------------------------------------------------------- dense layers

void dense_forward_avx2(const float* x, const float* w, const float* bias, float* y,
                        std::size_t batch, std::size_t in, std::size_t out) {
    // bt tiles keep the y block cache-resident; k outer loads each weight row
    // once per tile
    constexpr std::size_t kTile = 64;
    for (std::size_t bt0 = 0; bt0 < batch; bt0 += kTile) {
        const std::size_t bt1 = std::min(batch, bt0 + kTile);
        for (std::size_t bt = bt0; bt < bt1; ++bt) {
            float* yr = y + bt * out;
            std::size_t o = 0;
            for (; o + 8 <= out; o += 8)
                _mm256_storeu_ps(yr + o, _mm256_loadu_ps(bias + o));
            for (; o < out; ++o)
                yr[o] = bias[o];
        }
        for (std::size_t k = 0; k < in; ++k) {
            const float* wr = w + k * out;
            for (std::size_t bt = bt0; bt < bt1; ++bt) {
                float* yr = y + bt * out;
                const float xs = x[bt * in + k];
                const __m256 xv = _mm256_set1_ps(xs);
                std::size_t o = 0;
                for (; o + 8 <= out; o += 8) {
                    const __m256 cur = _mm256_loadu_ps(yr + o);
                    _mm256_storeu_ps(yr + o,
                                     _mm256_fmadd_ps(xv, _mm256_loadu_ps(wr + o), cur));
                }
                for (; o < out; ++o)
                    yr[o] += xs * wr[o];
            }
        }
    }
}

void dense_dx_avx2(const float* dy, const float* w, float* dx, std::size_t batch,
                   std::size_t in, std::size_t out) {
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const float* dyr = dy + bt * out;
        float* dxr = dx + bt * in;
        for (std::size_t k = 0; k < in; ++k) {
            const float* wr = w + k * out;
            __m256 acc = _mm256_setzero_ps();
            std::size_t o = 0;
            for (; o + 8 <= out; o += 8)
                acc = _mm256_fmadd_ps(_mm256_loadu_ps(dyr + o), _mm256_loadu_ps(wr + o), acc);
            __m128 lo = _mm256_castps256_ps128(acc);
            __m128 hi = _mm256_extractf128_ps(acc, 1);
            lo = _mm_add_ps(lo, hi);
            lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
            lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
            float s = _mm_cvtss_f32(lo);
            for (; o < out; ++o)
                s += dyr[o] * wr[o];
            dxr[k] = s;
        }
    }
}

void dense_dw_avx2(const float* x, const float* dy, float* dw, std::size_t batch,
                   std::size_t in, std::size_t out) {
    for (std::size_t i = 0; i < in * out; ++i)
        dw[i] = 0.0f;
    constexpr std::size_t kTile = 64;
    for (std::size_t bt0 = 0; bt0 < batch; bt0 += kTile) {
        const std::size_t bt1 = std::min(batch, bt0 + kTile);
        for (std::size_t k = 0; k < in; ++k) {
            float* dwr = dw + k * out;
            for (std::size_t bt = bt0; bt < bt1; ++bt) {
                const __m256 xv = _mm256_set1_ps(x[bt * in + k]);
                const float* dyr = dy + bt * out;
                std::size_t o = 0;
                for (; o + 8 <= out; o += 8) {
                    const __m256 cur = _mm256_loadu_ps(dwr + o);
                    _mm256_storeu_ps(dwr + o,
                                     _mm256_fmadd_ps(xv, _mm256_loadu_ps(dyr + o), cur));
                }
                const float xs = x[bt * in + k];
                for (; o < out; ++o)
                    dwr[o] += xs * dyr[o];
            }
        }
    }
}

void bias_grad_avx2(const float* dy, float* db, std::size_t batch, std::size_t out) {
    for (std::size_t o = 0; o < out; ++o)
        db[o] = 0.0f;
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const float* dyr = dy + bt * out;
        std::size_t o = 0;
        for (; o + 8 <= out; o += 8) {
            const __m256 cur = _mm256_loadu_ps(db + o);
            _mm256_storeu_ps(db + o, _mm256_add_ps(cur, _mm256_loadu_ps(dyr + o)));
        }
        for (; o < out; ++o)
            db[o] += dyr[o];
    }
}

void relu_avx2(float* a, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(a + i, _mm256_max_ps(_mm256_loadu_ps(a + i), zero));
    for (; i < n; ++i)
        a[i] = a[i] > 0.0f ? a[i] : 0.0f;
}

void relu_bwd_avx2(const float* act, float* g, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(act + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(g + i, _mm256_and_ps(_mm256_loadu_ps(g + i), mask));
    }
    for (; i < n; ++i)
        g[i] = act[i] > 0.0f ? g[i] : 0.0f;
}

void adam_update_avx2(float* w, float* m, float* v, const float* g, std::size_t n, float lr,
                      float beta1, float beta2, float eps, float inv_bc1, float inv_bc2) {
    const __m256 vb1 = _mm256_set1_ps(beta1);
    const __m256 vb2 = _mm256_set1_ps(beta2);
    const __m256 vomb1 = _mm256_set1_ps(1.0f - beta1);
    const __m256 vomb2 = _mm256_set1_ps(1.0f - beta2);
    const __m256 veps = _mm256_set1_ps(eps);
    const __m256 vlr = _mm256_set1_ps(lr);
    const __m256 vibc1 = _mm256_set1_ps(inv_bc1);
    const __m256 vibc2 = _mm256_set1_ps(inv_bc2);

    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gi = _mm256_loadu_ps(g + i);
        // mirror the scalar mul/add sequence exactly (no FMA)
        __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)),
                                  _mm256_mul_ps(vomb1, gi));
        __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                                  _mm256_mul_ps(vomb2, _mm256_mul_ps(gi, gi)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        const __m256 mhat = _mm256_mul_ps(mi, vibc1);
        const __m256 vhat = _mm256_mul_ps(vi, vibc2);
        const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
        const __m256 upd = _mm256_mul_ps(vlr, _mm256_div_ps(mhat, denom));
        _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), upd));
    }
    for (; i < n; ++i) {
        const float gi = g[i];
        m[i] = beta1 * m[i] + (1.0f - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0f - beta2) * (gi * gi);
        const float mhat = m[i] * inv_bc1;
        const float vhat = v[i] * inv_bc2;
        w[i] = w[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

} // namespace

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const KernelTable& avx2_table() {
    static const KernelTable table = {
        "avx2",
        resample_linear_avx2,
        resample_quadratic_avx2,
        resample_cubic_avx2,
        resample_pchip_avx2,
        sum_sq_diff_avx2,
        sum_abs_diff_avx2,
        trapezoid_acc_avx2,
        ndvi_plane_avx2,
        dense_forward_avx2,
        dense_dx_avx2,
        dense_dw_avx2,
        bias_grad_avx2,
        relu_avx2,
        relu_bwd_avx2,
        adam_update_avx2,
    };
    return table;
}

} // namespace specfuse::kern

#endif // x86
