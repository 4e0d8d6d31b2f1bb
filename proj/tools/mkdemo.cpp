// specfuse-mkdemo: writes a synthetic two-sensor scene (cubes, labels,
// manifest) so the CLI pipeline can be exercised without external data.
//
// The latent scene holds a vegetation region and a non-vegetation region
// with distinct smooth spectra plus an unlabeled border. Sensor "vnir10"
// samples 400-700 nm at 10 nm, sensor "vnir4" (the fusion reference)
// samples 430-860 nm at 4 nm; each sensor adds its own band noise.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "specfuse/core.hpp"
#include "specfuse/io.hpp"

namespace fs = std::filesystem;
using namespace specfuse;

namespace {

double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double veg_spectrum(double nm) {
    // green bump, red dip, NIR shoulder
    const double green = 2.2 * std::exp(-(nm - 555.0) * (nm - 555.0) / (2.0 * 45.0 * 45.0));
    const double red_dip = -1.1 * std::exp(-(nm - 670.0) * (nm - 670.0) / (2.0 * 25.0 * 25.0));
    const double nir = 4.0 / (1.0 + std::exp(-(nm - 715.0) / 12.0));
    return 1.2 + green + red_dip + nir;
}

double soil_spectrum(double nm) {
    // slowly rising line with a broad hump
    return 2.0 + 0.004 * (nm - 400.0) +
           0.8 * std::exp(-(nm - 620.0) * (nm - 620.0) / (2.0 * 120.0 * 120.0));
}

struct Scene {
    std::size_t width, height;
    std::vector<std::int32_t> truth; // 0 unknown, 1 vegetation, 2 non-vegetation
    std::vector<double> scale;       // per-pixel brightness jitter

    Scene(std::size_t w, std::size_t h, std::mt19937_64& rng) : width(w), height(h) {
        truth.resize(w * h);
        scale.resize(w * h);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const std::size_t i = r * w + c;
                if (c == w / 2) // unlabeled seam between the regions
                    truth[i] = 0;
                else
                    truth[i] = c < w / 2 ? 1 : 2;
                scale[i] = 0.9 + 0.2 * unit(rng);
            }
    }
};

SpectralCube render(const Scene& scene, const WavelengthGrid& grid, double noise_sigma,
                    std::mt19937_64& rng) {
    SpectralCube cube;
    cube.width = scene.width;
    cube.height = scene.height;
    cube.grid = grid;
    cube.data.resize(cube.pixels() * grid.size());
    for (std::size_t b = 0; b < grid.size(); ++b) {
        const double nm = grid[b];
        for (std::size_t p = 0; p < cube.pixels(); ++p) {
            const double base = scene.truth[p] == 2 ? soil_spectrum(nm) : veg_spectrum(nm);
            const double noisy =
                base * scene.scale[p] + noise_sigma * (2.0 * unit(rng) - 1.0);
            cube.data[b * cube.pixels() + p] = static_cast<float>(noisy);
        }
    }
    return cube;
}

LabelMap labels_for(const Scene& scene) {
    LabelMap m;
    m.width = scene.width;
    m.height = scene.height;
    m.classes = scene.truth;
    m.merge_table = {{0, 0}, {1, 1}, {2, 2}};
    return m;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic two-sensor demo scene for the specfuse pipeline"};
    std::string out_dir;
    std::size_t size = 48;
    std::uint64_t seed = 7;
    double noise = 0.02;
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--size", size, "Scene edge length in pixels");
    app.add_option("--seed", seed, "Noise seed");
    app.add_option("--noise", noise, "Per-band noise amplitude");
    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(out_dir);
        std::mt19937_64 rng(seed);
        const Scene scene(size, size, rng);

        const auto grid10 = WavelengthGrid::arithmetic(400, 10, 700);
        const auto grid4 = WavelengthGrid::arithmetic(430, 4, 860);
        const auto cube10 = render(scene, grid10, noise, rng);
        const auto cube4 = render(scene, grid4, noise, rng);
        const auto labels = labels_for(scene);

        write_cube(cube10, (fs::path(out_dir) / "vnir10").string());
        write_cube(cube4, (fs::path(out_dir) / "vnir4").string());
        write_labels(labels, (fs::path(out_dir) / "vnir10.labels.json").string());
        write_labels(labels, (fs::path(out_dir) / "vnir4.labels.json").string());

        DatasetManifest manifest;
        manifest.reference_name = "vnir4";
        // entry paths are relative to the manifest so the directory can move
        manifest.entries = {
            {"vnir10.scube.json", "vnir10.labels.json", "vnir10", 10.0},
            {"vnir4.scube.json", "vnir4.labels.json", "vnir4", 4.0},
        };
        const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
        write_manifest(manifest, manifest_path);

        std::printf("demo scene: %zux%zu pixels, sensors vnir10 (%zu bands) and vnir4 (%zu bands)\n",
                    size, size, grid10.size(), grid4.size());
        std::printf("manifest: %s\n", manifest_path.c_str());
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == Error::Kind::User ? 2 : 1;
    }
    return 0;
}
