#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specfuse/core.hpp"
#include "specfuse/interp.hpp"

namespace specfuse {

struct ExplicitGrid {
    double start = 0.0;
    double step = 0.0;
    double stop = 0.0;
};

struct FusionConfig {
    InterpolationMethod method;
    std::optional<ExplicitGrid> explicit_grid; // empty = derive from the reference entry
    std::optional<double> max_wavelength_cap;
    std::uint64_t seed = 0;
    double train_fraction = 0.8;
    bool normalize = false; // per-dataset min-max, off by default

    void validate() const;
};

/// Flattened labeled pixels ready for classifier training. Every sample
/// carries its merged class (1 or 2) and the dataset it came from.
struct SampleSet {
    std::size_t feature_width = 0;
    std::vector<double> wavelengths;        // fused grid, informational
    std::vector<float> features;            // size() x feature_width, row-major
    std::vector<std::uint8_t> labels;       // 1 = vegetation, 2 = non-vegetation
    std::vector<std::uint32_t> provenance;  // index into dataset_names
    std::vector<std::string> dataset_names;

    std::size_t size() const { return labels.size(); }
    const float* row(std::size_t i) const { return features.data() + i * feature_width; }
    const std::string& dataset_of(std::size_t i) const { return dataset_names[provenance[i]]; }
};

struct FusedDataset {
    std::string name;
    SpectralCube cube;
    std::optional<LabelMap> labels; // merged to {0,1,2}
};

/// Common wavelength grid for a fusion run: the reference grid (or an
/// explicit arithmetic grid) clipped to [max of dataset minima,
/// min(cap, min of dataset maxima)].
WavelengthGrid derive_reference_grid(const DatasetManifest& manifest, const FusionConfig& cfg);

std::vector<FusedDataset> fuse_datasets(const DatasetManifest& manifest, const FusionConfig& cfg,
                                        std::size_t workers = 0);

SampleSet build_sample_set(const std::vector<FusedDataset>& fused,
                           std::span<const std::string> selected);

/// Deterministic Fisher-Yates shuffle driven by std::mt19937_64(cfg.seed),
/// then a floor(train_fraction * n) / remainder split.
std::pair<SampleSet, SampleSet> split_shuffle(const SampleSet& samples, const FusionConfig& cfg);

// Tabular sample-set format: CSV with header "label,dataset,<wavelength...>".
void write_sample_set_csv(const SampleSet& samples, const std::string& path);
SampleSet read_sample_set_csv(const std::string& path);

} // namespace specfuse
