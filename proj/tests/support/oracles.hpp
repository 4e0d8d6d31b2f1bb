#pragma once

// Test-only oracles, independent of the library implementation paths they
// check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

// ------------------------------------------------------------ dense solver

/// Gaussian elimination with partial pivoting; A is n x n row-major.
inline std::vector<double> gaussian_solve(std::vector<double> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col]))
                pivot = r;
        if (A[pivot * n + col] == 0.0)
            throw std::runtime_error("singular system in oracle");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(A[col * n + c], A[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] / A[col * n + col];
            if (f == 0.0)
                continue;
            for (std::size_t c = col; c < n; ++c)
                A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c)
            acc -= A[r * n + c] * x[c];
        x[r] = acc / A[r * n + r];
    }
    return x;
}

/// Brute-force cubic spline: solves the full 4m x 4m system over global
/// monomials (interpolation + C1/C2 continuity + boundary closure) and
/// evaluates the piecewise polynomial at x.
struct DenseSpline {
    std::vector<double> xs;
    std::vector<double> coeff; // 4 per interval: g0 + g1 x + g2 x^2 + g3 x^3

    double eval(double x) const {
        const std::size_t m = xs.size() - 1;
        std::size_t i = 0;
        while (i + 1 < m && x > xs[i + 1])
            ++i;
        const double* g = coeff.data() + 4 * i;
        return g[0] + x * (g[1] + x * (g[2] + x * g[3]));
    }
};

inline DenseSpline dense_spline_fit(std::span<const double> xs, std::span<const double> ys,
                                    bool not_a_knot) {
    const std::size_t m = xs.size() - 1; // intervals
    const std::size_t n = 4 * m;
    std::vector<double> A(n * n, 0.0), b(n, 0.0);
    std::size_t row = 0;

    auto val_row = [&](std::size_t interval, double x, double rhs) {
        const std::size_t base = 4 * interval;
        A[row * n + base + 0] = 1.0;
        A[row * n + base + 1] = x;
        A[row * n + base + 2] = x * x;
        A[row * n + base + 3] = x * x * x;
        b[row] = rhs;
        ++row;
    };
    // C'_i(x) coefficients into row for interval, sign +/-1
    auto d1_terms = [&](std::size_t interval, double x, double sign) {
        const std::size_t base = 4 * interval;
        A[row * n + base + 1] += sign;
        A[row * n + base + 2] += sign * 2.0 * x;
        A[row * n + base + 3] += sign * 3.0 * x * x;
    };
    auto d2_terms = [&](std::size_t interval, double x, double sign) {
        const std::size_t base = 4 * interval;
        A[row * n + base + 2] += sign * 2.0;
        A[row * n + base + 3] += sign * 6.0 * x;
    };

    for (std::size_t i = 0; i < m; ++i) {
        val_row(i, xs[i], ys[i]);
        val_row(i, xs[i + 1], ys[i + 1]);
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        d1_terms(i, xs[i + 1], 1.0);
        d1_terms(i + 1, xs[i + 1], -1.0);
        ++row;
        d2_terms(i, xs[i + 1], 1.0);
        d2_terms(i + 1, xs[i + 1], -1.0);
        ++row;
    }
    if (not_a_knot) {
        A[row * n + 3] = 1.0;
        A[row * n + 4 + 3] = -1.0;
        ++row;
        A[row * n + 4 * (m - 2) + 3] = 1.0;
        A[row * n + 4 * (m - 1) + 3] = -1.0;
        ++row;
    } else {
        d2_terms(0, xs[0], 1.0);
        ++row;
        d2_terms(m - 1, xs[m], 1.0);
        ++row;
    }
    if (row != n)
        throw std::runtime_error("oracle system row count mismatch");

    DenseSpline s;
    s.xs.assign(xs.begin(), xs.end());
    s.coeff = gaussian_solve(std::move(A), std::move(b));
    return s;
}

// --------------------------------------------------------------- randomness

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

/// Strictly increasing grid of n points in [lo, hi] with a sane minimum gap.
inline std::vector<double> random_grid(std::mt19937_64& rng, std::size_t n, double lo,
                                       double hi) {
    std::vector<double> xs(n);
    for (;;) {
        for (auto& x : xs)
            x = uniform(rng, lo, hi);
        std::sort(xs.begin(), xs.end());
        bool ok = true;
        const double min_gap = (hi - lo) / (static_cast<double>(n) * 100.0);
        for (std::size_t i = 1; i < n; ++i)
            if (xs[i] - xs[i - 1] < min_gap)
                ok = false;
        if (ok)
            return xs;
    }
}

// ------------------------------------------------------------- separability

/// Plain logistic regression (gradient descent, double precision). Returns
/// training accuracy; near 1.0 certifies the data is linearly separable.
inline double logistic_accuracy(std::span<const float> features, std::size_t width,
                                std::span<const std::uint8_t> labels, std::size_t iters = 300,
                                double lr = 0.5) {
    const std::size_t n = labels.size();
    std::vector<double> w(width, 0.0);
    double bias = 0.0;

    // standardize per feature for conditioning
    std::vector<double> mean(width, 0.0), sd(width, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < width; ++k)
            mean[k] += features[i * width + k];
    for (auto& v : mean)
        v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < width; ++k) {
            const double d = features[i * width + k] - mean[k];
            sd[k] += d * d;
        }
    for (auto& v : sd)
        v = std::sqrt(v / static_cast<double>(n)) + 1e-12;

    std::vector<double> z(n);
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<double> gw(width, 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = bias;
            for (std::size_t k = 0; k < width; ++k)
                acc += w[k] * (features[i * width + k] - mean[k]) / sd[k];
            const double p = 1.0 / (1.0 + std::exp(-acc));
            const double t = labels[i] == 2 ? 1.0 : 0.0;
            const double g = p - t;
            for (std::size_t k = 0; k < width; ++k)
                gw[k] += g * (features[i * width + k] - mean[k]) / sd[k];
            gb += g;
            z[i] = acc;
        }
        for (std::size_t k = 0; k < width; ++k)
            w[k] -= lr * gw[k] / static_cast<double>(n);
        bias -= lr * gb / static_cast<double>(n);
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int pred = z[i] > 0.0 ? 2 : 1;
        if (pred == labels[i])
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

} // namespace oracle
