#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "specfuse/core.hpp"
#include "specfuse/interp.hpp"

namespace specfuse {

struct NdviConfig {
    double red_target_nm = 665.0;
    double nir_target_nm = 830.0;
};

struct NdviMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values; // row-major
};

enum class SurfaceNormalization { Span, Raw };

double mse(std::span<const double> a, std::span<const double> b);

/// Round-trip error of one pixel: interpolate onto `target`, back onto the
/// pixel's own wavelengths inside the target span, mean squared difference
/// over the nw compared wavelengths. Forward and backward use `method`.
double cmse_pixel(const SpectralPixel& p, const WavelengthGrid& target,
                  InterpolationMethod method);

double cmse_cube(const SpectralCube& cube, const WavelengthGrid& target,
                 InterpolationMethod method, std::size_t workers = 0);

/// Trapezoidal area under the spectrum, in intensity * nm.
double trapezoid_area(const WavelengthGrid& grid, std::span<const double> values);

/// Mean over pixels of |area(ref) - area(interp)|, both integrated over the
/// common wavelength span; Span divides by the span length, Raw keeps
/// intensity * nm units.
double surface_avg_difference(const SpectralCube& ref, const SpectralCube& interp,
                              SurfaceNormalization norm = SurfaceNormalization::Span);

/// Index of the band nearest to `target_nm` (ties take the lower band).
std::size_t nearest_band(const WavelengthGrid& grid, double target_nm);

/// (NIR - RED) / (NIR + RED) per pixel from the nearest bands; 0 where the
/// denominator vanishes. The cube span must cover both targets.
NdviMap ndvi_map(const SpectralCube& cube, const NdviConfig& cfg = {});

double ndvi_mse(const SpectralCube& ref, const SpectralCube& interp,
                const NdviConfig& cfg = {});

} // namespace specfuse
