#include <cmath>
#include <vector>

#include "specfuse/kern/eval.hpp"
#include "specfuse/kern/kernels.hpp"

// Reference implementations. The resample executors run the per-pixel
// double-precision routines from eval.hpp verbatim, one pixel at a time.

namespace specfuse::kern {
namespace {

void gather_pixel(const float* src, std::size_t npix, std::size_t nsrc, std::size_t p,
                  double* y) {
    for (std::size_t b = 0; b < nsrc; ++b)
        y[b] = static_cast<double>(src[b * npix + p]);
}

void scatter_pixel(float* dst, std::size_t npix, std::size_t nq, std::size_t p,
                   const double* out) {
    for (std::size_t k = 0; k < nq; ++k)
        dst[k * npix + p] = static_cast<float>(out[k]);
}

void resample_linear_scalar(const LinearPlan& plan, const float* src, std::size_t npix,
                            float* dst, std::size_t p0, std::size_t p1) {
    std::vector<double> y(plan.nsrc), out(plan.seg.size());
    for (std::size_t p = p0; p < p1; ++p) {
        gather_pixel(src, npix, plan.nsrc, p, y.data());
        eval_linear(plan, y.data(), out.data());
        scatter_pixel(dst, npix, out.size(), p, out.data());
    }
}

void resample_quadratic_scalar(const QuadraticPlan& plan, const float* src, std::size_t npix,
                               float* dst, std::size_t p0, std::size_t p1) {
    std::vector<double> y(plan.nsrc), out(plan.win.size());
    for (std::size_t p = p0; p < p1; ++p) {
        gather_pixel(src, npix, plan.nsrc, p, y.data());
        eval_quadratic(plan, y.data(), out.data());
        scatter_pixel(dst, npix, out.size(), p, out.data());
    }
}

void resample_cubic_scalar(const CubicPlan& plan, const float* src, std::size_t npix,
                           float* dst, std::size_t p0, std::size_t p1) {
    std::vector<double> y(plan.nsrc), out(plan.seg.size());
    CubicWork work;
    work.resize(plan.nsrc);
    for (std::size_t p = p0; p < p1; ++p) {
        gather_pixel(src, npix, plan.nsrc, p, y.data());
        eval_cubic(plan, y.data(), out.data(), work);
        scatter_pixel(dst, npix, out.size(), p, out.data());
    }
}

void resample_pchip_scalar(const PchipPlan& plan, const float* src, std::size_t npix,
                           float* dst, std::size_t p0, std::size_t p1) {
    std::vector<double> y(plan.nsrc), out(plan.seg.size());
    PchipWork work;
    work.resize(plan.nsrc);
    for (std::size_t p = p0; p < p1; ++p) {
        gather_pixel(src, npix, plan.nsrc, p, y.data());
        eval_pchip(plan, y.data(), out.data(), work);
        scatter_pixel(dst, npix, out.size(), p, out.data());
    }
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += std::abs(a[i] - b[i]);
    return acc;
}

void trapezoid_acc_scalar(double* acc, const float* lo, const float* hi,
                          double half_width, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j)
        acc[j] += half_width * (static_cast<double>(lo[j]) + static_cast<double>(hi[j]));
}

void ndvi_plane_scalar(const float* nir, const float* red, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double num = static_cast<double>(nir[j]) - static_cast<double>(red[j]);
        const double den = static_cast<double>(nir[j]) + static_cast<double>(red[j]);
        out[j] = (den == 0.0) ? 0.0 : num / den;
    }
}

void dense_forward_scalar(const float* x, const float* w, const float* bias, float* y,
                          std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t bt = 0; bt < batch; ++bt) {
        float* yr = y + bt * out;
        const float* xr = x + bt * in;
        for (std::size_t o = 0; o < out; ++o)
            yr[o] = bias[o];
        for (std::size_t k = 0; k < in; ++k) {
            const float xv = xr[k];
            const float* wr = w + k * out;
            for (std::size_t o = 0; o < out; ++o)
                yr[o] += xv * wr[o];
        }
    }
}

void dense_dx_scalar(const float* dy, const float* w, float* dx,
                     std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const float* dyr = dy + bt * out;
        float* dxr = dx + bt * in;
        for (std::size_t k = 0; k < in; ++k) {
            const float* wr = w + k * out;
            float acc = 0.0f;
            for (std::size_t o = 0; o < out; ++o)
                acc += dyr[o] * wr[o];
            dxr[k] = acc;
        }
    }
}

void dense_dw_scalar(const float* x, const float* dy, float* dw,
                     std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t i = 0; i < in * out; ++i)
        dw[i] = 0.0f;
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const float* xr = x + bt * in;
        const float* dyr = dy + bt * out;
        for (std::size_t k = 0; k < in; ++k) {
            const float xv = xr[k];
            float* dwr = dw + k * out;
            for (std::size_t o = 0; o < out; ++o)
                dwr[o] += xv * dyr[o];
        }
    }
}

void bias_grad_scalar(const float* dy, float* db, std::size_t batch, std::size_t out) {
    for (std::size_t o = 0; o < out; ++o)
        db[o] = 0.0f;
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const float* dyr = dy + bt * out;
        for (std::size_t o = 0; o < out; ++o)
            db[o] += dyr[o];
    }
}

void relu_scalar(float* a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        a[i] = a[i] > 0.0f ? a[i] : 0.0f;
}

void relu_bwd_scalar(const float* act, float* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        g[i] = act[i] > 0.0f ? g[i] : 0.0f;
}

void adam_update_scalar(float* w, float* m, float* v, const float* g, std::size_t n,
                        float lr, float beta1, float beta2, float eps,
                        float inv_bc1, float inv_bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        const float gi = g[i];
        m[i] = beta1 * m[i] + (1.0f - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0f - beta2) * (gi * gi);
        const float mhat = m[i] * inv_bc1;
        const float vhat = v[i] * inv_bc2;
        w[i] = w[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable table = {
        "scalar",
        resample_linear_scalar,
        resample_quadratic_scalar,
        resample_cubic_scalar,
        resample_pchip_scalar,
        sum_sq_diff_scalar,
        sum_abs_diff_scalar,
        trapezoid_acc_scalar,
        ndvi_plane_scalar,
        dense_forward_scalar,
        dense_dx_scalar,
        dense_dw_scalar,
        bias_grad_scalar,
        relu_scalar,
        relu_bwd_scalar,
        adam_update_scalar,
    };
    return table;
}

} // namespace specfuse::kern
