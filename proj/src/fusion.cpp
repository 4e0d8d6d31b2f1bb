#include "specfuse/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "specfuse/io.hpp"

namespace specfuse {
namespace {

std::vector<double> in_span(const std::vector<double>& values, double lo, double hi) {
    std::vector<double> out;
    for (double v : values)
        if (v >= lo && v <= hi)
            out.push_back(v);
    return out;
}

std::string span_listing(const DatasetManifest& manifest,
                         const std::vector<WavelengthGrid>& grids) {
    std::ostringstream out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (i)
            out << ", ";
        out << manifest.entries[i].name << " [" << grids[i].front() << ", " << grids[i].back()
            << "] nm";
    }
    return out.str();
}

void fisher_yates(std::vector<std::size_t>& order, std::mt19937_64& rng) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }
}

SampleSet subset(const SampleSet& s, std::span<const std::size_t> indices) {
    SampleSet out;
    out.feature_width = s.feature_width;
    out.wavelengths = s.wavelengths;
    out.dataset_names = s.dataset_names;
    out.features.resize(indices.size() * s.feature_width);
    out.labels.resize(indices.size());
    out.provenance.resize(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t i = indices[k];
        std::copy_n(s.row(i), s.feature_width, out.features.data() + k * s.feature_width);
        out.labels[k] = s.labels[i];
        out.provenance[k] = s.provenance[i];
    }
    return out;
}

} // namespace

void FusionConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw_user("train_fraction must lie in (0, 1), got " + std::to_string(train_fraction));
    if (explicit_grid && explicit_grid->step <= 0.0)
        throw_user("explicit grid step must be positive");
    if (max_wavelength_cap && *max_wavelength_cap <= 0.0)
        throw_user("wavelength cap must be positive");
}

WavelengthGrid derive_reference_grid(const DatasetManifest& manifest, const FusionConfig& cfg) {
    cfg.validate();
    if (manifest.entries.empty())
        throw_user("manifest holds no datasets");

    std::vector<WavelengthGrid> grids;
    grids.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
        try {
            grids.push_back(read_cube_grid(entry.cube_path));
        } catch (const Error& e) {
            throw Error(e.kind(), "dataset '" + entry.name + "': " + e.what());
        }
    }

    double lo = grids[0].front();
    double hi = grids[0].back();
    for (const auto& g : grids) {
        lo = std::max(lo, g.front());
        hi = std::min(hi, g.back());
    }
    if (cfg.max_wavelength_cap)
        hi = std::min(hi, *cfg.max_wavelength_cap);

    std::vector<double> nm;
    if (cfg.explicit_grid) {
        const WavelengthGrid full = WavelengthGrid::arithmetic(
            cfg.explicit_grid->start, cfg.explicit_grid->step, cfg.explicit_grid->stop);
        nm = in_span(full.nm, lo, hi);
    } else {
        const ManifestEntry& ref = manifest.reference();
        std::size_t ref_idx = 0;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i)
            if (&manifest.entries[i] == &ref)
                ref_idx = i;
        nm = in_span(grids[ref_idx].nm, lo, hi);
    }

    if (nm.size() < 2)
        throw_user("no common spectral range across datasets: " + span_listing(manifest, grids) +
                   (cfg.max_wavelength_cap
                        ? ", cap " + std::to_string(*cfg.max_wavelength_cap) + " nm"
                        : ""));
    return WavelengthGrid(std::move(nm));
}

std::vector<FusedDataset> fuse_datasets(const DatasetManifest& manifest, const FusionConfig& cfg,
                                        std::size_t workers) {
    const WavelengthGrid grid = derive_reference_grid(manifest, cfg);

    std::vector<FusedDataset> out;
    out.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
        try {
            SpectralCube cube = read_cube(entry.cube_path);
            const auto issues = validate_cube(cube);
            if (!issues.empty())
                throw_user("invalid cube: " + issues.front().invariant + " (" +
                           issues.front().detail + ")");

            FusedDataset fused;
            fused.name = entry.name;
            fused.cube = resample_cube(cube, grid, cfg.method, workers);

            if (cfg.normalize) {
                auto& data = fused.cube.data;
                const auto [mn_it, mx_it] = std::minmax_element(data.begin(), data.end());
                const float mn = *mn_it, mx = *mx_it;
                const float range = mx - mn;
                for (float& v : data)
                    v = range > 0.0f ? (v - mn) / range : 0.0f;
            }

            if (entry.has_labels()) {
                LabelMap raw = read_labels(entry.label_path);
                if (raw.width != cube.width || raw.height != cube.height)
                    throw_user("label raster is " + std::to_string(raw.width) + "x" +
                               std::to_string(raw.height) + " but the cube is " +
                               std::to_string(cube.width) + "x" + std::to_string(cube.height));
                fused.labels = merge_labels(raw);
            }
            out.push_back(std::move(fused));
        } catch (const Error& e) {
            throw Error(e.kind(), "dataset '" + entry.name + "': " + e.what());
        }
    }
    return out;
}

SampleSet build_sample_set(const std::vector<FusedDataset>& fused,
                           std::span<const std::string> selected) {
    if (selected.empty())
        throw_user("empty dataset selection");
    if (fused.empty())
        throw_user("no fused datasets");

    const WavelengthGrid& grid = fused.front().cube.grid;
    for (const auto& d : fused)
        if (!(d.cube.grid == grid))
            throw_internal("fused cubes do not share one grid");

    SampleSet set;
    set.feature_width = grid.size();
    set.wavelengths = grid.nm;

    for (const auto& name : selected) {
        for (const auto& seen : set.dataset_names)
            if (seen == name)
                throw_user("dataset '" + name + "' selected twice");
        const FusedDataset* dataset = nullptr;
        for (const auto& d : fused)
            if (d.name == name)
                dataset = &d;
        if (!dataset)
            throw_user("selected dataset '" + name + "' is not among the fused datasets");

        const std::uint32_t ds_index = static_cast<std::uint32_t>(set.dataset_names.size());
        set.dataset_names.push_back(name);
        if (!dataset->labels)
            continue; // unlabeled datasets contribute no samples

        const SpectralCube& cube = dataset->cube;
        const LabelMap& labels = *dataset->labels;
        const std::size_t npix = cube.pixels();
        for (std::size_t p = 0; p < npix; ++p) {
            const std::int32_t cls = labels.classes[p];
            if (cls == kClassUnknown)
                continue;
            for (std::size_t b = 0; b < set.feature_width; ++b)
                set.features.push_back(cube.data[b * npix + p]);
            set.labels.push_back(static_cast<std::uint8_t>(cls));
            set.provenance.push_back(ds_index);
        }
    }

    if (set.labels.empty())
        throw_user("zero labeled pixels across the selected datasets");
    return set;
}

std::pair<SampleSet, SampleSet> split_shuffle(const SampleSet& samples,
                                              const FusionConfig& cfg) {
    cfg.validate();
    const std::size_t n = samples.size();
    if (n < 2)
        throw_user("splitting requires at least 2 samples, got " + std::to_string(n));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::mt19937_64 rng(cfg.seed);
    fisher_yates(order, rng);

    const std::size_t ntrain =
        static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(n)));
    return {subset(samples, std::span(order).first(ntrain)),
            subset(samples, std::span(order).subspan(ntrain))};
}

void write_sample_set_csv(const SampleSet& samples, const std::string& path) {
    std::ostringstream out;
    out << "label,dataset";
    if (samples.wavelengths.size() != samples.feature_width)
        throw_internal("sample set wavelength metadata does not match feature width");
    for (double wl : samples.wavelengths)
        out << ',' << format_double(wl);
    out << '\n';
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << static_cast<int>(samples.labels[i]) << ',' << samples.dataset_of(i);
        const float* row = samples.row(i);
        for (std::size_t b = 0; b < samples.feature_width; ++b)
            out << ',' << format_float(row[b]);
        out << '\n';
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw_user("cannot open '" + path + "' for writing");
    file << out.str();
    if (!file)
        throw_user("write to '" + path + "' failed");
}

SampleSet read_sample_set_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw_user("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line))
        throw_user(path + ": empty sample file");

    SampleSet set;
    {
        std::stringstream header(line);
        std::string col;
        std::size_t idx = 0;
        while (std::getline(header, col, ',')) {
            if (idx == 0 && col != "label")
                throw_user(path + ": first column must be 'label'");
            if (idx == 1 && col != "dataset")
                throw_user(path + ": second column must be 'dataset'");
            if (idx >= 2)
                set.wavelengths.push_back(parse_double(col));
            ++idx;
        }
    }
    set.feature_width = set.wavelengths.size();
    if (set.feature_width == 0)
        throw_user(path + ": no feature columns");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::stringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ','))
            throw_user(path + ": malformed line " + std::to_string(line_no));
        int label = 0;
        {
            const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
            if (ec != std::errc() || p != cell.data() + cell.size())
                throw_user(path + ": line " + std::to_string(line_no) + " label '" + cell +
                           "' is not an integer");
        }
        if (label != kClassVegetation && label != kClassNonVegetation)
            throw_user(path + ": line " + std::to_string(line_no) + " carries label " + cell +
                       " outside {1, 2}");
        if (!std::getline(row, cell, ','))
            throw_user(path + ": malformed line " + std::to_string(line_no));

        std::uint32_t ds_index = 0;
        bool found = false;
        for (std::size_t d = 0; d < set.dataset_names.size(); ++d)
            if (set.dataset_names[d] == cell) {
                ds_index = static_cast<std::uint32_t>(d);
                found = true;
            }
        if (!found) {
            ds_index = static_cast<std::uint32_t>(set.dataset_names.size());
            set.dataset_names.push_back(cell);
        }

        std::size_t got = 0;
        while (std::getline(row, cell, ',')) {
            set.features.push_back(static_cast<float>(parse_double(cell)));
            ++got;
        }
        if (got != set.feature_width)
            throw_user(path + ": line " + std::to_string(line_no) + " holds " +
                       std::to_string(got) + " features, expected " +
                       std::to_string(set.feature_width));
        set.labels.push_back(static_cast<std::uint8_t>(label));
        set.provenance.push_back(ds_index);
    }
    if (set.labels.empty())
        throw_user(path + ": no samples");
    return set;
}

} // namespace specfuse
