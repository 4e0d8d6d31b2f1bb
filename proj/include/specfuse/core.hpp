#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "specfuse/error.hpp"

namespace specfuse {

/// Ordered wavelength axis in nanometers. Valid grids are strictly
/// increasing, finite, positive and hold at least two entries.
struct WavelengthGrid {
    std::vector<double> nm;

    WavelengthGrid() = default;
    explicit WavelengthGrid(std::vector<double> wavelengths) : nm(std::move(wavelengths)) {}

    std::size_t size() const { return nm.size(); }
    bool empty() const { return nm.empty(); }
    double front() const { return nm.front(); }
    double back() const { return nm.back(); }
    double operator[](std::size_t i) const { return nm[i]; }

    bool operator==(const WavelengthGrid&) const = default;

    /// Arithmetic grid start, start+step, ... up to and including stop.
    static WavelengthGrid arithmetic(double start, double step, double stop);
};

/// Width x height x bands raster with one intensity per (band, row, col).
/// Storage is band-sequential: index = band * (width*height) + row * width + col.
struct SpectralCube {
    std::size_t width = 0;
    std::size_t height = 0;
    WavelengthGrid grid;
    std::vector<float> data;

    std::size_t bands() const { return grid.size(); }
    std::size_t pixels() const { return width * height; }

    const float* plane(std::size_t band) const { return data.data() + band * pixels(); }
    float* plane(std::size_t band) { return data.data() + band * pixels(); }

    float at(std::size_t band, std::size_t row, std::size_t col) const {
        return data[band * pixels() + row * width + col];
    }
    float& at(std::size_t band, std::size_t row, std::size_t col) {
        return data[band * pixels() + row * width + col];
    }
};

/// One pixel's spectrum: intensities on a wavelength grid.
struct SpectralPixel {
    WavelengthGrid grid;
    std::vector<double> values;
};

// Merged class codes. Unknown sorts first so labeled pixels are
// selected with a single comparison.
inline constexpr std::int32_t kClassUnknown = 0;
inline constexpr std::int32_t kClassVegetation = 1;
inline constexpr std::int32_t kClassNonVegetation = 2;

/// Per-pixel class raster plus the table mapping source class ids onto
/// {0 = unknown, 1 = vegetation, 2 = non-vegetation}.
struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::int32_t> classes;
    std::map<std::int32_t, std::int32_t> merge_table;

    std::size_t pixels() const { return width * height; }
};

struct ManifestEntry {
    std::string cube_path;
    std::string label_path; // empty = no ground truth for this dataset
    std::string name;
    double native_resolution_nm = 0.0;

    bool has_labels() const { return !label_path.empty(); }
};

/// Machine-readable description of the datasets entering a fusion run.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string reference_name;

    const ManifestEntry& reference() const;
};

/// One violated invariant; `index` is the first offending element where
/// that makes sense (grid index, flat data index), 0 otherwise.
struct ValidationIssue {
    std::string invariant;
    std::size_t index = 0;
    std::string detail;
};

/// Checks every SpectralCube invariant. Never throws; an empty report
/// means the cube is valid.
std::vector<ValidationIssue> validate_cube(const SpectralCube& cube);

/// Extracts the spectrum at (row, col). Throws a user error naming the
/// offending axis when the index is out of bounds.
SpectralPixel pixel_at(const SpectralCube& cube, std::size_t row, std::size_t col);

/// Applies the merge table to every pixel. The result carries the
/// identity table over {0, 1, 2}; a class id missing from the table is
/// a user error naming the id.
LabelMap merge_labels(const LabelMap& labels);

} // namespace specfuse
