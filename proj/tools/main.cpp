// specfuse: batch CLI over the fusion pipeline
// (fuse -> metrics -> ndvi/plots -> train -> eval)

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specfuse/fusion.hpp"
#include "specfuse/io.hpp"
#include "specfuse/kern/kernels.hpp"
#include "specfuse/metrics.hpp"
#include "specfuse/mlp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace specfuse;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string stem_of(const std::string& path) {
    std::string s = fs::path(path).filename().string();
    for (const char* suffix : {".scube.json", ".scube.bin", ".mlp.json", ".mlp.bin"}) {
        const std::size_t len = std::strlen(suffix);
        if (s.size() > len && s.compare(s.size() - len, len, suffix) == 0)
            return s.substr(0, s.size() - len);
    }
    return fs::path(s).stem().string();
}

void write_provenance(const std::string& path, json record) {
    record["created"] = iso_timestamp();
    record["version"] = kVersion;
    record["kernel_backend"] = kern::backend_name(kern::active_backend());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw_user("cannot open '" + path + "' for writing");
    out << record.dump(2) << "\n";
    std::cout << "provenance: " << path << "\n";
}

InterpolationMethod method_from(const std::string& name, const std::string& boundary) {
    InterpolationMethod m = InterpolationMethod::parse(name);
    if (boundary == "natural")
        m.boundary = SplineBoundary::Natural;
    else if (boundary != "notaknot")
        throw_user("unknown boundary '" + boundary + "' (expected notaknot|natural)");
    return m;
}

json grid_json(const WavelengthGrid& g) {
    return {{"count", g.size()}, {"start_nm", g.front()}, {"stop_nm", g.back()},
            {"wavelengths", g.nm}};
}

// ------------------------------------------------------------------- fuse

struct FuseArgs {
    std::string manifest_path;
    std::string method = "linear";
    std::string boundary = "notaknot";
    std::string grid_spec; // START:STEP:STOP
    double cap = 0.0;
    bool has_cap = false;
    std::string out_dir;
    bool normalize = false;
    bool emit_samples = false;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::vector<std::string> select;
};

void run_fuse(const FuseArgs& args) {
    FusionConfig cfg;
    cfg.method = method_from(args.method, args.boundary);
    if (args.has_cap)
        cfg.max_wavelength_cap = args.cap;
    cfg.seed = args.seed;
    cfg.train_fraction = args.train_fraction;
    cfg.normalize = args.normalize;
    if (!args.grid_spec.empty()) {
        double start = 0, step = 0, stop = 0;
        if (std::sscanf(args.grid_spec.c_str(), "%lf:%lf:%lf", &start, &step, &stop) != 3)
            throw_user("--grid expects START:STEP:STOP, got '" + args.grid_spec + "'");
        cfg.explicit_grid = ExplicitGrid{start, step, stop};
    }

    const DatasetManifest manifest = read_manifest(args.manifest_path);
    fs::create_directories(args.out_dir);

    const WavelengthGrid grid = derive_reference_grid(manifest, cfg);
    const auto fused = fuse_datasets(manifest, cfg);

    DatasetManifest fused_manifest;
    fused_manifest.reference_name = manifest.reference_name;
    json outputs = json::array();
    for (const auto& d : fused) {
        const std::string base = (fs::path(args.out_dir) / d.name).string();
        write_cube(d.cube, base);
        ManifestEntry entry;
        entry.cube_path = d.name + ".scube.json"; // relative to the manifest
        entry.name = d.name;
        entry.native_resolution_nm = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
        if (d.labels) {
            entry.label_path = d.name + ".labels.json";
            write_labels(*d.labels, base + ".labels.json");
        }
        fused_manifest.entries.push_back(entry);
        outputs.push_back(base + ".scube.json");
        std::cout << "fused: " << d.name << " -> " << base << ".scube.{json,bin} ("
                  << grid.size() << " bands)\n";
    }
    const std::string fused_manifest_path =
        (fs::path(args.out_dir) / "fused_manifest.json").string();
    write_manifest(fused_manifest, fused_manifest_path);
    outputs.push_back(fused_manifest_path);

    if (args.emit_samples) {
        std::vector<std::string> selected = args.select;
        if (selected.empty())
            for (const auto& d : fused)
                if (d.labels)
                    selected.push_back(d.name);
        const SampleSet samples = build_sample_set(fused, selected);
        const auto [train, test] = split_shuffle(samples, cfg);
        const std::string train_path = (fs::path(args.out_dir) / "samples_train.csv").string();
        const std::string test_path = (fs::path(args.out_dir) / "samples_test.csv").string();
        write_sample_set_csv(train, train_path);
        write_sample_set_csv(test, test_path);
        outputs.push_back(train_path);
        outputs.push_back(test_path);
        std::cout << "samples: " << train.size() << " train / " << test.size() << " test\n";
    }

    json prov;
    prov["command"] = "fuse";
    prov["manifest"] = args.manifest_path;
    prov["manifest_hash"] = file_hash_hex(args.manifest_path);
    prov["method"] = cfg.method.name();
    prov["boundary"] = cfg.method.kind == InterpolationMethod::Kind::CubicSpline
                           ? (cfg.method.boundary == SplineBoundary::Natural ? "natural"
                                                                             : "notaknot")
                           : "";
    prov["cap_nm"] = args.has_cap ? json(args.cap) : json(nullptr);
    prov["seed"] = cfg.seed;
    prov["train_fraction"] = cfg.train_fraction;
    prov["normalization"] = cfg.normalize ? "minmax" : "none";
    prov["grid"] = grid_json(grid);
    prov["outputs"] = outputs;
    write_provenance((fs::path(args.out_dir) / "provenance.json").string(), prov);
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
    std::string cube_path;
    std::string against_path;
    std::string metric;
    std::string method = "linear";
    std::string boundary = "notaknot";
    std::string normalization = "span";
    double red = 665.0, nir = 830.0;
    std::string out_path;
};

void run_metrics(const MetricsArgs& args) {
    const SpectralCube a = read_cube(args.cube_path);
    const SpectralCube b = read_cube(args.against_path);

    json report;
    report["dataset"] = stem_of(args.cube_path);
    report["against"] = stem_of(args.against_path);
    report["metric"] = args.metric;
    report["method"] = nullptr;
    report["normalization"] = nullptr;
    json config = json::object();

    double value = 0.0;
    if (args.metric == "cmse") {
        const auto method = method_from(args.method, args.boundary);
        value = cmse_cube(a, b.grid, method);
        report["method"] = method.name();
        config["forward_grid"] = grid_json(b.grid);
    } else if (args.metric == "surface") {
        if (args.normalization != "span" && args.normalization != "raw")
            throw_user("--normalization must be span|raw");
        const auto norm = args.normalization == "raw" ? SurfaceNormalization::Raw
                                                      : SurfaceNormalization::Span;
        value = surface_avg_difference(a, b, norm);
        report["normalization"] = args.normalization;
    } else if (args.metric == "mse-ndvi") {
        NdviConfig ncfg;
        ncfg.red_target_nm = args.red;
        ncfg.nir_target_nm = args.nir;
        value = ndvi_mse(a, b, ncfg);
        config["red_target_nm"] = args.red;
        config["nir_target_nm"] = args.nir;
    } else {
        throw_user("unknown metric '" + args.metric + "' (expected cmse|surface|mse-ndvi)");
    }
    report["value"] = value;
    report["config"] = config;

    std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw_user("cannot open '" + args.out_path + "' for writing");
    out << report.dump(2) << "\n";
    std::cout << args.metric << " = " << format_double(value) << "\n";

    json prov;
    prov["command"] = "metrics";
    prov["inputs"] = {args.cube_path, args.against_path};
    prov["metric"] = args.metric;
    prov["outputs"] = {args.out_path};
    write_provenance(args.out_path + ".provenance.json", prov);
}

// ------------------------------------------------------------------- ndvi

struct NdviArgs {
    std::string cube_path;
    double red = 665.0, nir = 830.0;
    std::string out_prefix;
};

void run_ndvi(const NdviArgs& args) {
    const SpectralCube cube = read_cube(args.cube_path);
    NdviConfig cfg;
    cfg.red_target_nm = args.red;
    cfg.nir_target_nm = args.nir;
    const NdviMap map = ndvi_map(cube, cfg);

    const std::string csv_path = args.out_prefix + ".ndvi.csv";
    {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw_user("cannot open '" + csv_path + "' for writing");
        out << "row,col,ndvi\n";
        for (std::size_t r = 0; r < map.height; ++r)
            for (std::size_t c = 0; c < map.width; ++c)
                out << r << ',' << c << ','
                    << format_double(map.values[r * map.width + c]) << '\n';
    }

    double mn = 1.0, mx = -1.0, mean = 0.0;
    std::size_t water = 0, bare = 0, sparse = 0, dense = 0;
    for (double v : map.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        mean += v;
        if (v <= 0.0)
            ++water;
        else if (v <= 0.33)
            ++bare;
        else if (v <= 0.66)
            ++sparse;
        else
            ++dense;
    }
    const double n = static_cast<double>(map.values.empty() ? 1 : map.values.size());
    mean /= n;

    json report;
    report["dataset"] = stem_of(args.cube_path);
    report["metric"] = "ndvi";
    report["config"] = {{"red_target_nm", args.red},
                        {"nir_target_nm", args.nir},
                        {"red_band_nm", cube.grid[nearest_band(cube.grid, args.red)]},
                        {"nir_band_nm", cube.grid[nearest_band(cube.grid, args.nir)]}};
    report["stats"] = {{"min", mn}, {"max", mx}, {"mean", mean}};
    report["fractions"] = {{"water_or_inanimate", water / n},
                           {"bare_soil", bare / n},
                           {"sparse_vegetation", sparse / n},
                           {"dense_vegetation", dense / n}};
    const std::string report_path = args.out_prefix + ".ndvi.json";
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    out << report.dump(2) << "\n";
    std::cout << "ndvi mean = " << format_double(mean) << "\n";

    json prov;
    prov["command"] = "ndvi";
    prov["inputs"] = {args.cube_path};
    prov["outputs"] = {csv_path, report_path};
    write_provenance(args.out_prefix + ".provenance.json", prov);
}

// ------------------------------------------------------------------- plot

struct PlotArgs {
    std::vector<std::string> cubes; // NAME=PATH
    std::string at;                 // R,C
    std::string reduce = "mean";
    std::string format = "csv";
    std::string out_prefix;
    bool surface = false;
};

void run_plot(const PlotArgs& args) {
    if (args.format != "csv" && args.format != "json")
        throw_user("--format must be csv|json");

    PlotBundle bundle;
    json prov_inputs = json::array();
    if (!args.surface) {
        std::size_t row = 0, col = 0;
        if (std::sscanf(args.at.c_str(), "%zu,%zu", &row, &col) != 2)
            throw_user("--at expects ROW,COL, got '" + args.at + "'");
        std::vector<std::pair<std::string, SpectralPixel>> pixels;
        for (const auto& spec : args.cubes) {
            const auto eq = spec.find('=');
            const std::string name = eq == std::string::npos ? stem_of(spec)
                                                             : spec.substr(0, eq);
            const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
            pixels.emplace_back(name, pixel_at(read_cube(path), row, col));
            prov_inputs.push_back(path);
        }
        bundle = export_pixel_plot(pixels);
        bundle.metadata["pixel"] = args.at;
    } else {
        if (args.cubes.size() != 1)
            throw_user("surface plots take exactly one --cube");
        const auto& spec = args.cubes[0];
        const auto eq = spec.find('=');
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        BandReduction reduction;
        if (args.reduce == "mean")
            reduction = BandReduction::Mean;
        else if (args.reduce == "sum")
            reduction = BandReduction::Sum;
        else
            throw_user("--reduce must be mean|sum");
        bundle = export_surface_plot(read_cube(path), reduction);
        prov_inputs.push_back(path);
    }

    const std::string out_path = args.out_prefix + (args.format == "csv" ? ".csv" : ".json");
    if (args.format == "csv")
        write_plot_csv(bundle, out_path);
    else
        write_plot_json(bundle, out_path);
    std::cout << "plot: " << out_path << "\n";

    json prov;
    prov["command"] = "plot";
    prov["mode"] = args.surface ? "surface" : "pixel";
    prov["inputs"] = prov_inputs;
    prov["outputs"] = {out_path};
    write_provenance(args.out_prefix + ".provenance.json", prov);
}

// ------------------------------------------------------------ train / eval

struct TrainArgs {
    std::string data_path;
    std::string arch = "66";
    std::size_t epochs = 150;
    double lr = 0.0001;
    std::size_t batch = 2048;
    std::uint64_t seed = 0;
    std::string out_ckpt;
};

mlp::MlpArchitecture parse_arch(const std::string& spec, std::size_t data_width) {
    using mlp::MlpArchitecture;
    MlpArchitecture arch;
    if (spec == "66")
        arch = MlpArchitecture::preset_66();
    else if (spec == "103")
        arch = MlpArchitecture::preset_103();
    else if (spec.rfind("custom:", 0) == 0) {
        const auto parse_size = [&](const std::string& tok) -> std::size_t {
            std::size_t v = 0;
            const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size() || v == 0)
                throw_user("--arch: '" + tok + "' is not a positive layer size");
            return v;
        };
        const std::string rest = spec.substr(7);
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw_user("--arch custom expects custom:INPUT:H1,H2,...");
        arch.input_size = parse_size(rest.substr(0, colon));
        std::stringstream ss(rest.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ','))
            arch.hidden_sizes.push_back(parse_size(tok));
        arch.output_size = 2;
    } else {
        throw_user("--arch must be 66, 103 or custom:INPUT:H1,H2,...");
    }
    if (arch.input_size != data_width)
        throw_user("architecture expects " + std::to_string(arch.input_size) +
                   " bands but the data holds " + std::to_string(data_width));
    return arch;
}

void run_train(const TrainArgs& args) {
    const SampleSet train_set = read_sample_set_csv(args.data_path);
    const auto arch = parse_arch(args.arch, train_set.feature_width);

    mlp::TrainConfig cfg;
    cfg.epochs = args.epochs;
    cfg.learning_rate = static_cast<float>(args.lr);
    cfg.batch_size = args.batch;
    cfg.seed = args.seed;

    auto model = mlp::init_model(arch, cfg.seed);
    const auto history = mlp::train(model, train_set, cfg);

    mlp::save_checkpoint(model, cfg, args.out_ckpt);
    const std::string history_path = args.out_ckpt + ".history.csv";
    mlp::write_history_csv(history, history_path);

    std::cout << "trained " << args.epochs << " epochs on " << train_set.size()
              << " samples; final train accuracy = "
              << format_double(history.back().accuracy) << "\n";

    json prov;
    prov["command"] = "train";
    prov["inputs"] = {args.data_path};
    prov["data_hash"] = file_hash_hex(args.data_path);
    prov["architecture"] = {{"input_size", arch.input_size},
                            {"hidden_sizes", arch.hidden_sizes},
                            {"output_size", arch.output_size}};
    prov["epochs"] = cfg.epochs;
    prov["learning_rate"] = cfg.learning_rate;
    prov["batch_size"] = cfg.batch_size;
    prov["seed"] = cfg.seed;
    prov["final_train_accuracy"] = history.back().accuracy;
    prov["outputs"] = {args.out_ckpt + ".mlp.json", args.out_ckpt + ".mlp.bin", history_path};
    write_provenance(args.out_ckpt + ".provenance.json", prov);
}

struct EvalArgs {
    std::string checkpoint;
    std::string data_path;
    std::string out_path;
};

void run_eval(const EvalArgs& args) {
    const auto model = mlp::load_checkpoint(args.checkpoint);
    const SampleSet set = read_sample_set_csv(args.data_path);
    if (set.feature_width != model.arch.input_size)
        throw_user("checkpoint expects " + std::to_string(model.arch.input_size) +
                   " bands but the data holds " + std::to_string(set.feature_width));

    const auto result = mlp::evaluate(model, set);
    json report;
    report["checkpoint"] = stem_of(args.checkpoint);
    report["dataset"] = stem_of(args.data_path);
    report["samples"] = result.total;
    report["accuracy"] = result.accuracy;
    report["confusion"] = {{"vegetation", {{"vegetation", result.confusion[0][0]},
                                           {"non_vegetation", result.confusion[0][1]}}},
                           {"non_vegetation", {{"vegetation", result.confusion[1][0]},
                                               {"non_vegetation", result.confusion[1][1]}}}};

    std::cout << "accuracy = " << format_double(result.accuracy) << " over " << result.total
              << " samples\n";
    std::cout << "confusion [veg->veg veg->non; non->veg non->non] = ["
              << result.confusion[0][0] << " " << result.confusion[0][1] << "; "
              << result.confusion[1][0] << " " << result.confusion[1][1] << "]\n";

    std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw_user("cannot open '" + args.out_path + "' for writing");
    out << report.dump(2) << "\n";

    json prov;
    prov["command"] = "eval";
    prov["inputs"] = {args.checkpoint, args.data_path};
    prov["accuracy"] = result.accuracy;
    prov["outputs"] = {args.out_path};
    write_provenance(args.out_path + ".provenance.json", prov);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"specfuse: multisource spectral image fusion, quality metrics and "
                 "vegetation-segmentation validation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    FuseArgs fuse_args;
    auto* fuse = app.add_subcommand("fuse", "Resample all datasets onto a common grid");
    fuse->add_option("--manifest", fuse_args.manifest_path, "Dataset manifest JSON")->required();
    fuse->add_option("--method", fuse_args.method, "linear|quadratic|cubic|pchip");
    fuse->add_option("--boundary", fuse_args.boundary, "Cubic boundary: notaknot|natural");
    fuse->add_option("--grid", fuse_args.grid_spec, "Explicit grid START:STEP:STOP (nm)");
    auto* cap_opt = fuse->add_option("--cap", fuse_args.cap, "Upper wavelength cap (nm)");
    fuse->add_option("--out", fuse_args.out_dir, "Output directory")->required();
    fuse->add_flag("--normalize", fuse_args.normalize, "Per-dataset min-max normalization");
    fuse->add_flag("--emit-samples", fuse_args.emit_samples,
                   "Write shuffled train/test sample CSVs");
    fuse->add_option("--train-fraction", fuse_args.train_fraction, "Train split fraction");
    fuse->add_option("--seed", fuse_args.seed, "Shuffle seed");
    fuse->add_option("--select", fuse_args.select,
                     "Datasets contributing samples (default: all labeled)");

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "Fidelity metrics between two cubes");
    metrics->add_option("--cube", metrics_args.cube_path, "Reference cube")->required();
    metrics->add_option("--against", metrics_args.against_path, "Comparison cube")->required();
    metrics->add_option("--metric", metrics_args.metric, "cmse|surface|mse-ndvi")->required();
    metrics->add_option("--method", metrics_args.method, "Interpolation method for cmse");
    metrics->add_option("--boundary", metrics_args.boundary, "notaknot|natural");
    metrics->add_option("--normalization", metrics_args.normalization,
                        "surface normalization: span|raw");
    metrics->add_option("--red", metrics_args.red, "RED target (nm) for mse-ndvi");
    metrics->add_option("--nir", metrics_args.nir, "NIR target (nm) for mse-ndvi");
    metrics->add_option("--out", metrics_args.out_path, "Report JSON path")->required();

    NdviArgs ndvi_args;
    auto* ndvi = app.add_subcommand("ndvi", "NDVI raster and summary for one cube");
    ndvi->add_option("--cube", ndvi_args.cube_path, "Input cube")->required();
    ndvi->add_option("--red", ndvi_args.red, "RED target (nm)");
    ndvi->add_option("--nir", ndvi_args.nir, "NIR target (nm)");
    ndvi->add_option("--out", ndvi_args.out_prefix, "Output prefix")->required();

    PlotArgs plot_args;
    auto* plot = app.add_subcommand("plot", "Plot-ready data exports");
    auto* plot_pixel = plot->add_subcommand("pixel", "Spectral signatures of one pixel");
    plot_pixel->add_option("--cube", plot_args.cubes, "NAME=PATH (repeatable)")->required();
    plot_pixel->add_option("--at", plot_args.at, "ROW,COL")->required();
    plot_pixel->add_option("--format", plot_args.format, "csv|json");
    plot_pixel->add_option("--out", plot_args.out_prefix, "Output prefix")->required();
    auto* plot_surface = plot->add_subcommand("surface", "Band-reduced surface of a cube");
    plot_surface->add_option("--cube", plot_args.cubes, "NAME=PATH or PATH")->required();
    plot_surface->add_option("--reduce", plot_args.reduce, "mean|sum");
    plot_surface->add_option("--format", plot_args.format, "csv|json");
    plot_surface->add_option("--out", plot_args.out_prefix, "Output prefix")->required();
    plot->require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train the pixel classifier");
    train->add_option("--train-data", train_args.data_path, "Training sample CSV")->required();
    train->add_option("--arch", train_args.arch, "66|103|custom:INPUT:H1,H2,...");
    train->add_option("--epochs", train_args.epochs, "Training epochs");
    train->add_option("--lr", train_args.lr, "Learning rate");
    train->add_option("--batch", train_args.batch, "Batch size");
    train->add_option("--seed", train_args.seed, "Init/shuffle seed");
    train->add_option("--out", train_args.out_ckpt, "Checkpoint base path")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a sample CSV");
    eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint base path")->required();
    eval->add_option("--data", eval_args.data_path, "Sample CSV")->required();
    eval->add_option("--out", eval_args.out_path, "Report JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err;
        err["error"] = e.what();
        err["kind"] = "user";
        std::cerr << err.dump() << "\n";
        return 2;
    }

    try {
        fuse_args.has_cap = cap_opt->count() > 0;
        if (fuse->parsed())
            run_fuse(fuse_args);
        else if (metrics->parsed())
            run_metrics(metrics_args);
        else if (ndvi->parsed())
            run_ndvi(ndvi_args);
        else if (plot->parsed()) {
            plot_args.surface = plot_surface->parsed();
            run_plot(plot_args);
        } else if (train->parsed())
            run_train(train_args);
        else if (eval->parsed())
            run_eval(eval_args);
    } catch (const Error& e) {
        json err;
        err["error"] = e.what();
        err["kind"] = e.kind() == Error::Kind::User ? "user" : "internal";
        std::cerr << err.dump() << "\n";
        return e.kind() == Error::Kind::User ? 2 : 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        err["kind"] = "internal";
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
