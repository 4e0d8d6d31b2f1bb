#pragma once

#include <cstddef>
#include <string>

#include "specfuse/kern/plans.hpp"

namespace specfuse::kern {

enum class Backend { Scalar, Avx2, Neon };

const char* backend_name(Backend b);

// Runtime-dispatched inner loops. Scalar entries are the reference; SIMD
// backends must agree with them per the classes below, which is what
// tests/test_kernels.cpp asserts:
//
//   bit-exact:  resample_*, trapezoid_acc, ndvi_plane, relu, relu_bwd,
//               bias_grad, adam_update (identical per-element op sequence,
//               no FMA contraction)
//   tolerance:  sum_sq_diff, sum_abs_diff (lane-partial accumulation),
//               dense_forward, dense_dx, dense_dw (FMA + lane partials)
struct KernelTable {
    const char* name;

    // Spectral resampling over band-sequential f32 cubes. `src` has
    // plan.nsrc planes of npix floats, `dst` one plane per query; the
    // executor handles pixels [p0, p1).
    void (*resample_linear)(const LinearPlan&, const float* src, std::size_t npix,
                            float* dst, std::size_t p0, std::size_t p1);
    void (*resample_quadratic)(const QuadraticPlan&, const float* src, std::size_t npix,
                               float* dst, std::size_t p0, std::size_t p1);
    void (*resample_cubic)(const CubicPlan&, const float* src, std::size_t npix,
                           float* dst, std::size_t p0, std::size_t p1);
    void (*resample_pchip)(const PchipPlan&, const float* src, std::size_t npix,
                           float* dst, std::size_t p0, std::size_t p1);

    // metric reductions / maps
    double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
    double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
    // acc[j] += half_width * (lo[j] + hi[j])
    void (*trapezoid_acc)(double* acc, const float* lo, const float* hi,
                          double half_width, std::size_t n);
    // out[j] = (nir-red)/(nir+red), 0 where the denominator is 0
    void (*ndvi_plane)(const float* nir, const float* red, double* out, std::size_t n);

    // dense layers; weights laid out [in][out] so the output dimension is
    // contiguous
    void (*dense_forward)(const float* x, const float* w, const float* bias, float* y,
                          std::size_t batch, std::size_t in, std::size_t out);
    void (*dense_dx)(const float* dy, const float* w, float* dx,
                     std::size_t batch, std::size_t in, std::size_t out);
    void (*dense_dw)(const float* x, const float* dy, float* dw,
                     std::size_t batch, std::size_t in, std::size_t out);
    void (*bias_grad)(const float* dy, float* db, std::size_t batch, std::size_t out);
    void (*relu)(float* a, std::size_t n);
    void (*relu_bwd)(const float* act, float* g, std::size_t n);
    void (*adam_update)(float* w, float* m, float* v, const float* g, std::size_t n,
                        float lr, float beta1, float beta2, float eps,
                        float inv_bc1, float inv_bc2);
};

const KernelTable& scalar_table();

#if defined(__x86_64__) || defined(__i386__)
bool avx2_supported();
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

// Active table. Defaults to the best supported backend; the SPECFUSE_KERNELS
// environment variable (scalar|avx2|neon|auto) pins it, set_backend overrides
// programmatically. The choice is fixed for the life of the process unless
// set_backend is called, so results within one run are reproducible.
const KernelTable& active();
Backend active_backend();
void set_backend(Backend b); // throws a user error when unsupported

} // namespace specfuse::kern
