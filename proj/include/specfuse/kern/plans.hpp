#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace specfuse::kern {

// Precomputed query->interval resolution for one (source grid, target grid,
// method) combination. Everything that depends only on the two grids is
// resolved here once; executors run the remaining per-pixel arithmetic.
//
// knot_idx[k] >= 0 marks a query that coincides with source knot k; executors
// copy the ordinate through so knot queries are exact to the bit.

struct LinearPlan {
    std::size_t nsrc = 0;
    std::vector<std::int32_t> knot_idx;
    std::vector<std::int32_t> seg; // bracketing interval
    std::vector<double> t;         // (q - x_i) / h_i
};

struct QuadraticPlan {
    std::size_t nsrc = 0;
    std::vector<std::int32_t> knot_idx;
    std::vector<std::int32_t> win;    // 3-point window start
    std::vector<double> l0, l1, l2;   // Lagrange basis values at the query
};

struct CubicPlan {
    std::size_t nsrc = 0;
    std::vector<std::int32_t> knot_idx;
    std::vector<std::int32_t> seg;
    std::vector<double> u; // q - x_seg

    // per interval
    std::vector<double> h, inv_h, inv_6h;

    // prefactored tridiagonal moment system over the interior knots
    // (Thomas factorization; the matrix depends only on the knots)
    std::vector<double> elim;     // forward elimination multipliers, [0] unused
    std::vector<double> inv_diag; // reciprocal pivots
    std::vector<double> upper;    // upper band

    // boundary moments: M_first = b0_1*Mi[0] + b0_2*Mi[1], and mirrored at
    // the far end. All four are zero for natural boundaries.
    double b0_1 = 0.0, b0_2 = 0.0;
    double bn_1 = 0.0, bn_2 = 0.0;
};

struct PchipPlan {
    std::size_t nsrc = 0;
    std::vector<std::int32_t> knot_idx;
    std::vector<std::int32_t> seg;
    // Hermite basis at the query; b10/b11 carry the interval width factor
    std::vector<double> b00, b01, b10, b11;

    // per interval
    std::vector<double> h, inv_h;
    // Fritsch-Carlson weights per interior knot
    std::vector<double> w1, w2, wsum;
};

} // namespace specfuse::kern
