#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "specfuse/core.hpp"

namespace specfuse {

// Cube container: <base>.scube.json header + <base>.scube.bin payload.
// Header fields are exactly {width, height, wavelengths, dtype, layout,
// byte_order}; the payload is raw 32-bit little-endian floats, band-major
// then row-major. write/read round-trips bit-exactly.

void write_cube(const SpectralCube& cube, const std::string& base_path);
SpectralCube read_cube(const std::string& path); // base path or either file
WavelengthGrid read_cube_grid(const std::string& path); // header only

// Label maps live in a single <path>.labels.json document with fields
// {width, height, classes, merge_table}.
void write_labels(const LabelMap& labels, const std::string& path);
LabelMap read_labels(const std::string& path);

DatasetManifest read_manifest(const std::string& path);
void write_manifest(const DatasetManifest& manifest, const std::string& path);

/// FNV-1a 64 of a file's bytes, lowercase hex; used in provenance records.
std::string file_hash_hex(const std::string& path);

// Plot-ready data for the 2-D pixel figures and 3-D surface figures.
struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotBundle {
    enum class Kind { Pixel2D, Surface3D };
    Kind kind = Kind::Pixel2D;
    std::vector<PlotSeries> series; // pixel2d
    std::size_t width = 0, height = 0;
    std::vector<double> z; // surface3d, row-major
    std::map<std::string, std::string> metadata;
};

enum class BandReduction { Sum, Mean };

PlotBundle export_pixel_plot(const std::vector<std::pair<std::string, SpectralPixel>>& pixels);
PlotBundle export_surface_plot(const SpectralCube& cube, BandReduction reduction);

void write_plot_csv(const PlotBundle& bundle, const std::string& path);
void write_plot_json(const PlotBundle& bundle, const std::string& path);
PlotBundle read_plot_csv(const std::string& path);

// Shortest round-trip formatting used by every text emitter.
std::string format_double(double v);
std::string format_float(float v);
double parse_double(const std::string& s);

} // namespace specfuse
