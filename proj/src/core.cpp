#include "specfuse/core.hpp"

#include <algorithm>
#include <cmath>

namespace specfuse {

WavelengthGrid WavelengthGrid::arithmetic(double start, double step, double stop) {
    if (step <= 0.0)
        throw_user("grid step must be positive, got " + std::to_string(step));
    if (stop < start)
        throw_user("grid stop must not precede start");
    std::vector<double> nm;
    // Index-based generation keeps the spacing exact for representable
    // steps; the slack keeps the stop value included when start + k*step
    // rounds a few ulps past it.
    const double slack = step * 1e-9;
    for (std::size_t k = 0;; ++k) {
        const double w = start + static_cast<double>(k) * step;
        if (w > stop + slack)
            break;
        nm.push_back(std::min(w, stop));
    }
    return WavelengthGrid(std::move(nm));
}

const ManifestEntry& DatasetManifest::reference() const {
    const ManifestEntry* found = nullptr;
    for (const auto& e : entries) {
        if (e.name == reference_name) {
            if (found)
                throw_user("manifest reference_name '" + reference_name + "' matches more than one entry");
            found = &e;
        }
    }
    if (!found)
        throw_user("manifest reference_name '" + reference_name + "' matches no entry");
    return *found;
}

std::vector<ValidationIssue> validate_cube(const SpectralCube& cube) {
    std::vector<ValidationIssue> issues;

    if (cube.grid.size() < 2)
        issues.push_back({"grid length >= 2", 0,
                          "grid holds " + std::to_string(cube.grid.size()) + " wavelengths"});

    for (std::size_t i = 0; i < cube.grid.size(); ++i) {
        const double w = cube.grid[i];
        if (!std::isfinite(w) || w <= 0.0) {
            issues.push_back({"finite positive wavelengths", i,
                              "wavelength[" + std::to_string(i) + "] = " + std::to_string(w)});
            break;
        }
    }
    for (std::size_t i = 1; i < cube.grid.size(); ++i) {
        if (!(cube.grid[i] > cube.grid[i - 1])) {
            issues.push_back({"strictly increasing wavelengths", i,
                              "wavelength[" + std::to_string(i) + "] does not exceed its predecessor"});
            break;
        }
    }

    const std::size_t expected = cube.width * cube.height * cube.grid.size();
    if (cube.data.size() != expected) {
        issues.push_back({"data length = width * height * bands", 0,
                          "expected " + std::to_string(expected) + " values, got " +
                              std::to_string(cube.data.size())});
    }

    for (std::size_t i = 0; i < cube.data.size(); ++i) {
        if (!std::isfinite(cube.data[i])) {
            issues.push_back({"finite intensities", i,
                              "data[" + std::to_string(i) + "] is not finite"});
            break;
        }
    }

    return issues;
}

SpectralPixel pixel_at(const SpectralCube& cube, std::size_t row, std::size_t col) {
    if (row >= cube.height)
        throw_user("row index " + std::to_string(row) + " out of bounds on row axis (height " +
                   std::to_string(cube.height) + ")");
    if (col >= cube.width)
        throw_user("column index " + std::to_string(col) + " out of bounds on column axis (width " +
                   std::to_string(cube.width) + ")");

    SpectralPixel p;
    p.grid = cube.grid;
    p.values.resize(cube.bands());
    const std::size_t npix = cube.pixels();
    const std::size_t offset = row * cube.width + col;
    for (std::size_t b = 0; b < cube.bands(); ++b)
        p.values[b] = static_cast<double>(cube.data[b * npix + offset]);
    return p;
}

LabelMap merge_labels(const LabelMap& labels) {
    LabelMap out;
    out.width = labels.width;
    out.height = labels.height;
    out.classes.resize(labels.classes.size());

    for (std::size_t i = 0; i < labels.classes.size(); ++i) {
        const auto it = labels.merge_table.find(labels.classes[i]);
        if (it == labels.merge_table.end())
            throw_user("unmapped class " + std::to_string(labels.classes[i]) +
                       " at pixel " + std::to_string(i));
        const std::int32_t merged = it->second;
        if (merged < kClassUnknown || merged > kClassNonVegetation)
            throw_user("merge table maps class " + std::to_string(labels.classes[i]) +
                       " to invalid code " + std::to_string(merged));
        out.classes[i] = merged;
    }

    out.merge_table = {{kClassUnknown, kClassUnknown},
                       {kClassVegetation, kClassVegetation},
                       {kClassNonVegetation, kClassNonVegetation}};
    return out;
}

} // namespace specfuse
