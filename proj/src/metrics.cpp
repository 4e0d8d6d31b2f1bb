#include "specfuse/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "specfuse/kern/kernels.hpp"
#include "specfuse/parallel.hpp"

namespace specfuse {
namespace {

// Source band range [first, last] inside [lo, hi].
std::pair<std::size_t, std::size_t> bands_in_span(const WavelengthGrid& grid, double lo,
                                                  double hi) {
    std::size_t first = grid.size(), last = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] >= lo && grid[i] <= hi) {
            if (first == grid.size())
                first = i;
            last = i;
        }
    }
    if (first == grid.size())
        throw_user("no wavelengths inside the span [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "] nm");
    return {first, last};
}

} // namespace

double mse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw_user("mse length mismatch: " + std::to_string(a.size()) + " vs " +
                   std::to_string(b.size()));
    if (a.empty())
        throw_user("mse requires at least one element");
    return kern::active().sum_sq_diff(a.data(), b.data(), a.size()) /
           static_cast<double>(a.size());
}

double cmse_pixel(const SpectralPixel& p, const WavelengthGrid& target,
                  InterpolationMethod method) {
    if (p.values.size() != p.grid.size())
        throw_user("pixel value count does not match its grid");

    Interpolator1D fwd(p.grid.nm, method, target.nm);

    const auto [first, last] = bands_in_span(p.grid, target.front(), target.back());
    const std::size_t nw = last - first + 1;
    std::vector<double> back_x(p.grid.nm.begin() + static_cast<std::ptrdiff_t>(first),
                               p.grid.nm.begin() + static_cast<std::ptrdiff_t>(last + 1));
    Interpolator1D bwd(target.nm, method, back_x);

    std::vector<double> forward(target.size()), round_trip(nw);
    fwd.eval(p.values.data(), forward.data());
    bwd.eval(forward.data(), round_trip.data());

    const double ss =
        kern::active().sum_sq_diff(p.values.data() + first, round_trip.data(), nw);
    return ss / static_cast<double>(nw);
}

double cmse_cube(const SpectralCube& cube, const WavelengthGrid& target,
                 InterpolationMethod method, std::size_t workers) {
    const std::size_t npix = cube.pixels();
    if (npix == 0)
        throw_user("cmse of an empty cube");
    if (cube.data.size() != npix * cube.bands())
        throw_user("cube data length does not match width*height*bands");

    const Interpolator1D fwd_proto(cube.grid.nm, method, target.nm);
    const auto [first, last] = bands_in_span(cube.grid, target.front(), target.back());
    const std::size_t nw = last - first + 1;
    std::vector<double> back_x(cube.grid.nm.begin() + static_cast<std::ptrdiff_t>(first),
                               cube.grid.nm.begin() + static_cast<std::ptrdiff_t>(last + 1));
    const Interpolator1D bwd_proto(target.nm, method, back_x);

    const std::size_t nsrc = cube.bands();
    const float* src = cube.data.data();
    std::vector<double> per_pixel(npix);

    parallel_chunks(npix, resolve_workers(workers), [&](std::size_t b, std::size_t e) {
        Interpolator1D fwd = fwd_proto;
        Interpolator1D bwd = bwd_proto;
        std::vector<double> y(nsrc), forward(target.size()), round_trip(nw);
        for (std::size_t p = b; p < e; ++p) {
            for (std::size_t band = 0; band < nsrc; ++band)
                y[band] = static_cast<double>(src[band * npix + p]);
            fwd.eval(y.data(), forward.data());
            bwd.eval(forward.data(), round_trip.data());
            const double ss =
                kern::active().sum_sq_diff(y.data() + first, round_trip.data(), nw);
            per_pixel[p] = ss / static_cast<double>(nw);
        }
    });

    // Sequential mean in pixel order keeps the result independent of the
    // worker partitioning.
    double acc = 0.0;
    for (double v : per_pixel)
        acc += v;
    return acc / static_cast<double>(npix);
}

double trapezoid_area(const WavelengthGrid& grid, std::span<const double> values) {
    if (grid.size() != values.size())
        throw_user("trapezoid length mismatch: " + std::to_string(grid.size()) +
                   " wavelengths vs " + std::to_string(values.size()) + " values");
    if (grid.size() < 2)
        throw_user("trapezoid integration requires at least 2 points");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double half = 0.5 * (grid[i + 1] - grid[i]);
        acc += half * (values[i] + values[i + 1]);
    }
    return acc;
}

double surface_avg_difference(const SpectralCube& ref, const SpectralCube& interp,
                              SurfaceNormalization norm) {
    if (ref.width != interp.width || ref.height != interp.height)
        throw_user("surface difference dimension mismatch: " + std::to_string(ref.width) + "x" +
                   std::to_string(ref.height) + " vs " + std::to_string(interp.width) + "x" +
                   std::to_string(interp.height));
    const std::size_t npix = ref.pixels();
    if (npix == 0)
        throw_user("surface difference of an empty cube");

    const double lo = std::max(ref.grid.front(), interp.grid.front());
    const double hi = std::min(ref.grid.back(), interp.grid.back());
    if (!(hi > lo))
        throw_user("disjoint spectral spans: [" + std::to_string(ref.grid.front()) + ", " +
                   std::to_string(ref.grid.back()) + "] vs [" +
                   std::to_string(interp.grid.front()) + ", " +
                   std::to_string(interp.grid.back()) + "] nm");

    const auto& kt = kern::active();
    auto integrate = [&](const SpectralCube& cube, std::vector<double>& acc) {
        const auto [first, last] = bands_in_span(cube.grid, lo, hi);
        if (last == first)
            throw_user("only one wavelength inside the common span [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "] nm; cannot integrate");
        acc.assign(npix, 0.0);
        for (std::size_t i = first; i < last; ++i) {
            const double half = 0.5 * (cube.grid[i + 1] - cube.grid[i]);
            kt.trapezoid_acc(acc.data(), cube.plane(i), cube.plane(i + 1), half, npix);
        }
    };

    std::vector<double> area_ref, area_int;
    integrate(ref, area_ref);
    integrate(interp, area_int);

    const double total = kt.sum_abs_diff(area_ref.data(), area_int.data(), npix);
    const double mean = total / static_cast<double>(npix);
    return norm == SurfaceNormalization::Span ? mean / (hi - lo) : mean;
}

std::size_t nearest_band(const WavelengthGrid& grid, double target_nm) {
    if (grid.empty())
        throw_user("nearest band lookup on an empty grid");
    std::size_t best = 0;
    double best_dist = std::abs(grid[0] - target_nm);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double d = std::abs(grid[i] - target_nm);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

NdviMap ndvi_map(const SpectralCube& cube, const NdviConfig& cfg) {
    if (!(cfg.nir_target_nm > cfg.red_target_nm))
        throw_user("NDVI NIR target (" + std::to_string(cfg.nir_target_nm) +
                   " nm) must exceed the RED target (" + std::to_string(cfg.red_target_nm) +
                   " nm)");
    if (cube.data.size() != cube.pixels() * cube.bands())
        throw_user("cube data length does not match width*height*bands");
    if (cube.grid.size() < 2)
        throw_user("NDVI requires a cube with at least 2 bands");
    if (cfg.red_target_nm < cube.grid.front() || cfg.red_target_nm > cube.grid.back())
        throw_user("cube spectral span [" + std::to_string(cube.grid.front()) + ", " +
                   std::to_string(cube.grid.back()) + "] nm has no RED coverage at " +
                   std::to_string(cfg.red_target_nm) + " nm");
    if (cfg.nir_target_nm < cube.grid.front() || cfg.nir_target_nm > cube.grid.back())
        throw_user("cube spectral span [" + std::to_string(cube.grid.front()) + ", " +
                   std::to_string(cube.grid.back()) + "] nm has no NIR coverage at " +
                   std::to_string(cfg.nir_target_nm) + " nm");

    const std::size_t red = nearest_band(cube.grid, cfg.red_target_nm);
    const std::size_t nir = nearest_band(cube.grid, cfg.nir_target_nm);

    NdviMap map;
    map.width = cube.width;
    map.height = cube.height;
    map.values.resize(cube.pixels());
    kern::active().ndvi_plane(cube.plane(nir), cube.plane(red), map.values.data(),
                              cube.pixels());
    return map;
}

double ndvi_mse(const SpectralCube& ref, const SpectralCube& interp, const NdviConfig& cfg) {
    if (ref.width != interp.width || ref.height != interp.height)
        throw_user("NDVI MSE dimension mismatch");
    const NdviMap a = ndvi_map(ref, cfg);
    const NdviMap b = ndvi_map(interp, cfg);
    return mse(a.values, b.values);
}

} // namespace specfuse
