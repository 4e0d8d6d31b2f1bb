// NEON kernel variants for aarch64. Same contract as the AVX2 file: the
// resample executors mirror the scalar op sequence exactly (2 double lanes),
// dense-layer kernels use FMA and match scalar within tolerance. The cubic
// and pchip executors stay on the scalar reference here.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "specfuse/kern/eval.hpp"
#include "specfuse/kern/kernels.hpp"

namespace specfuse::kern {
namespace {

inline float64x2_t load2_f32_as_f64(const float* p) {
    return vcvt_f64_f32(vld1_f32(p));
}

inline void store2_f64_as_f32(float* p, float64x2_t v) {
    vst1_f32(p, vcvt_f32_f64(v));
}

void resample_linear_neon(const LinearPlan& plan, const float* src, std::size_t npix,
                          float* dst, std::size_t p0, std::size_t p1) {
    const std::size_t nq = plan.seg.size();
    std::size_t p = p0;
    for (; p + 2 <= p1; p += 2) {
        for (std::size_t k = 0; k < nq; ++k) {
            if (plan.knot_idx[k] >= 0) {
                const float* sp = src + static_cast<std::size_t>(plan.knot_idx[k]) * npix + p;
                store2_f64_as_f32(dst + k * npix + p, load2_f32_as_f64(sp));
                continue;
            }
            const std::size_t i = static_cast<std::size_t>(plan.seg[k]);
            const float64x2_t y0 = load2_f32_as_f64(src + i * npix + p);
            const float64x2_t y1 = load2_f32_as_f64(src + (i + 1) * npix + p);
            const float64x2_t t = vdupq_n_f64(plan.t[k]);
            const float64x2_t r = vaddq_f64(y0, vmulq_f64(t, vsubq_f64(y1, y0)));
            store2_f64_as_f32(dst + k * npix + p, r);
        }
    }
    if (p < p1)
        scalar_table().resample_linear(plan, src, npix, dst, p, p1);
}

void resample_quadratic_neon(const QuadraticPlan& plan, const float* src, std::size_t npix,
                             float* dst, std::size_t p0, std::size_t p1) {
    const std::size_t nq = plan.win.size();
    std::size_t p = p0;
    for (; p + 2 <= p1; p += 2) {
        for (std::size_t k = 0; k < nq; ++k) {
            if (plan.knot_idx[k] >= 0) {
                const float* sp = src + static_cast<std::size_t>(plan.knot_idx[k]) * npix + p;
                store2_f64_as_f32(dst + k * npix + p, load2_f32_as_f64(sp));
                continue;
            }
            const std::size_t w = static_cast<std::size_t>(plan.win[k]);
            const float64x2_t y0 = load2_f32_as_f64(src + w * npix + p);
            const float64x2_t y1 = load2_f32_as_f64(src + (w + 1) * npix + p);
            const float64x2_t y2 = load2_f32_as_f64(src + (w + 2) * npix + p);
            const float64x2_t a = vmulq_f64(y0, vdupq_n_f64(plan.l0[k]));
            const float64x2_t b = vmulq_f64(y1, vdupq_n_f64(plan.l1[k]));
            const float64x2_t c = vmulq_f64(y2, vdupq_n_f64(plan.l2[k]));
            store2_f64_as_f32(dst + k * npix + p, vaddq_f64(vaddq_f64(a, b), c));
        }
    }
    if (p < p1)
        scalar_table().resample_quadratic(plan, src, npix, dst, p, p1);
}

double sum_sq_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vaddq_f64(acc, vmulq_f64(d, d));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double sum_abs_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vaddq_f64(acc, vabsq_f64(d));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i)
        s += std::abs(a[i] - b[i]);
    return s;
}

void trapezoid_acc_neon(double* acc, const float* lo, const float* hi, double half_width,
                        std::size_t n) {
    const float64x2_t hw = vdupq_n_f64(half_width);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t a = load2_f32_as_f64(lo + j);
        const float64x2_t b = load2_f32_as_f64(hi + j);
        const float64x2_t cur = vld1q_f64(acc + j);
        vst1q_f64(acc + j, vaddq_f64(cur, vmulq_f64(hw, vaddq_f64(a, b))));
    }
    for (; j < n; ++j)
        acc[j] += half_width * (static_cast<double>(lo[j]) + static_cast<double>(hi[j]));
}

void ndvi_plane_neon(const float* nir, const float* red, double* out, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t a = load2_f32_as_f64(nir + j);
        const float64x2_t b = load2_f32_as_f64(red + j);
        const float64x2_t num = vsubq_f64(a, b);
        const float64x2_t den = vaddq_f64(a, b);
        const float64x2_t r = vdivq_f64(num, den);
        const uint64x2_t zero_mask = vceqq_f64(den, zero);
        vst1q_f64(out + j, vbslq_f64(zero_mask, zero, r));
    }
    for (; j < n; ++j) {
        const double num = static_cast<double>(nir[j]) - static_cast<double>(red[j]);
        const double den = static_cast<double>(nir[j]) + static_cast<double>(red[j]);
        out[j] = (den == 0.0) ? 0.0 : num / den;
    }
}

void dense_forward_neon(const float* x, const float* w, const float* bias, float* y,
                        std::size_t batch, std::size_t in, std::size_t out) {
    constexpr std::size_t kTile = 64;
    for (std::size_t bt0 = 0; bt0 < batch; bt0 += kTile) {
        const std::size_t bt1 = std::min(batch, bt0 + kTile);
        for (std::size_t bt = bt0; bt < bt1; ++bt) {
            float* yr = y + bt * out;
            for (std::size_t o = 0; o < out; ++o)
                yr[o] = bias[o];
        }
        for (std::size_t k = 0; k < in; ++k) {
            const float* wr = w + k * out;
            for (std::size_t bt = bt0; bt < bt1; ++bt) {
                float* yr = y + bt * out;
                const float xs = x[bt * in + k];
                const float32x4_t xv = vdupq_n_f32(xs);
                std::size_t o = 0;
                for (; o + 4 <= out; o += 4)
                    vst1q_f32(yr + o, vfmaq_f32(vld1q_f32(yr + o), xv, vld1q_f32(wr + o)));
                for (; o < out; ++o)
                    yr[o] += xs * wr[o];
            }
        }
    }
}

void dense_dx_neon(const float* dy, const float* w, float* dx, std::size_t batch,
                   std::size_t in, std::size_t out) {
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const float* dyr = dy + bt * out;
        float* dxr = dx + bt * in;
        for (std::size_t k = 0; k < in; ++k) {
            const float* wr = w + k * out;
            float32x4_t acc = vdupq_n_f32(0.0f);
            std::size_t o = 0;
            for (; o + 4 <= out; o += 4)
                acc = vfmaq_f32(acc, vld1q_f32(dyr + o), vld1q_f32(wr + o));
            float s = vaddvq_f32(acc);
            for (; o < out; ++o)
                s += dyr[o] * wr[o];
            dxr[k] = s;
        }
    }
}

void dense_dw_neon(const float* x, const float* dy, float* dw, std::size_t batch,
                   std::size_t in, std::size_t out) {
    for (std::size_t i = 0; i < in * out; ++i)
        dw[i] = 0.0f;
    constexpr std::size_t kTile = 64;
    for (std::size_t bt0 = 0; bt0 < batch; bt0 += kTile) {
        const std::size_t bt1 = std::min(batch, bt0 + kTile);
        for (std::size_t k = 0; k < in; ++k) {
            float* dwr = dw + k * out;
            for (std::size_t bt = bt0; bt < bt1; ++bt) {
                const float xs = x[bt * in + k];
                const float32x4_t xv = vdupq_n_f32(xs);
                const float* dyr = dy + bt * out;
                std::size_t o = 0;
                for (; o + 4 <= out; o += 4)
                    vst1q_f32(dwr + o, vfmaq_f32(vld1q_f32(dwr + o), xv, vld1q_f32(dyr + o)));
                for (; o < out; ++o)
                    dwr[o] += xs * dyr[o];
            }
        }
    }
}

void bias_grad_neon(const float* dy, float* db, std::size_t batch, std::size_t out) {
    for (std::size_t o = 0; o < out; ++o)
        db[o] = 0.0f;
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const float* dyr = dy + bt * out;
        std::size_t o = 0;
        for (; o + 4 <= out; o += 4)
            vst1q_f32(db + o, vaddq_f32(vld1q_f32(db + o), vld1q_f32(dyr + o)));
        for (; o < out; ++o)
            db[o] += dyr[o];
    }
}

void relu_neon(float* a, std::size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(a + i, vmaxq_f32(vld1q_f32(a + i), zero));
    for (; i < n; ++i)
        a[i] = a[i] > 0.0f ? a[i] : 0.0f;
}

void relu_bwd_neon(const float* act, float* g, std::size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const uint32x4_t mask = vcgtq_f32(vld1q_f32(act + i), zero);
        const uint32x4_t gv = vreinterpretq_u32_f32(vld1q_f32(g + i));
        vst1q_f32(g + i, vreinterpretq_f32_u32(vandq_u32(gv, mask)));
    }
    for (; i < n; ++i)
        g[i] = act[i] > 0.0f ? g[i] : 0.0f;
}

void adam_update_neon(float* w, float* m, float* v, const float* g, std::size_t n, float lr,
                      float beta1, float beta2, float eps, float inv_bc1, float inv_bc2) {
    const float32x4_t vb1 = vdupq_n_f32(beta1);
    const float32x4_t vb2 = vdupq_n_f32(beta2);
    const float32x4_t vomb1 = vdupq_n_f32(1.0f - beta1);
    const float32x4_t vomb2 = vdupq_n_f32(1.0f - beta2);
    const float32x4_t veps = vdupq_n_f32(eps);
    const float32x4_t vlr = vdupq_n_f32(lr);
    const float32x4_t vibc1 = vdupq_n_f32(inv_bc1);
    const float32x4_t vibc2 = vdupq_n_f32(inv_bc2);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t gi = vld1q_f32(g + i);
        const float32x4_t mi =
            vaddq_f32(vmulq_f32(vb1, vld1q_f32(m + i)), vmulq_f32(vomb1, gi));
        const float32x4_t vi = vaddq_f32(vmulq_f32(vb2, vld1q_f32(v + i)),
                                         vmulq_f32(vomb2, vmulq_f32(gi, gi)));
        vst1q_f32(m + i, mi);
        vst1q_f32(v + i, vi);
        const float32x4_t mhat = vmulq_f32(mi, vibc1);
        const float32x4_t vhat = vmulq_f32(vi, vibc2);
        const float32x4_t denom = vaddq_f32(vsqrtq_f32(vhat), veps);
        const float32x4_t upd = vmulq_f32(vlr, vdivq_f32(mhat, denom));
        vst1q_f32(w + i, vsubq_f32(vld1q_f32(w + i), upd));
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

const KernelTable& neon_table() {
    static const KernelTable table = {
        "neon",
        resample_linear_neon,
        resample_quadratic_neon,
        scalar_table().resample_cubic,
        scalar_table().resample_pchip,
        sum_sq_diff_neon,
        sum_abs_diff_neon,
        trapezoid_acc_neon,
        ndvi_plane_neon,
        dense_forward_neon,
        dense_dx_neon,
        dense_dw_neon,
        bias_grad_neon,
        relu_neon,
        relu_bwd_neon,
        adam_update_neon,
    };
    return table;
}

} // namespace specfuse::kern

#endif // aarch64
