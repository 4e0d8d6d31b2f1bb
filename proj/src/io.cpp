#include "specfuse/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace specfuse {

using nlohmann::json;

namespace {

constexpr const char* kHeaderSuffix = ".scube.json";
constexpr const char* kPayloadSuffix = ".scube.bin";

std::string strip_suffix(const std::string& path) {
    for (const char* suffix : {kHeaderSuffix, kPayloadSuffix}) {
        const std::size_t len = std::strlen(suffix);
        if (path.size() > len && path.compare(path.size() - len, len, suffix) == 0)
            return path.substr(0, path.size() - len);
    }
    return path;
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw_user("cannot open '" + path + "' for reading");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw_user("'" + path + "' is not valid JSON");
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw_user("cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw_user("write to '" + path + "' failed");
}

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a)
                known = true;
        if (!known)
            throw_user(context + ": unknown field '" + key + "'");
    }
}

const json& require_field(const json& obj, const char* name, const std::string& context) {
    const auto it = obj.find(name);
    if (it == obj.end())
        throw_user(context + ": missing field '" + std::string(name) + "'");
    return *it;
}

// f32 payloads are little-endian on disk; swap on big-endian hosts.
void to_little_endian(std::vector<float>& values) {
    if constexpr (std::endian::native == std::endian::big) {
        for (float& f : values) {
            auto u = std::bit_cast<std::uint32_t>(f);
            u = __builtin_bswap32(u);
            f = std::bit_cast<float>(u);
        }
    }
}

WavelengthGrid grid_from_header(const json& header, const std::string& context) {
    const json& wl = require_field(header, "wavelengths", context);
    if (!wl.is_array() || wl.size() < 2)
        throw_user(context + ": field 'wavelengths' must be an array of at least 2 numbers");
    std::vector<double> nm;
    nm.reserve(wl.size());
    for (const auto& v : wl) {
        if (!v.is_number())
            throw_user(context + ": field 'wavelengths' holds a non-numeric entry");
        nm.push_back(v.get<double>());
    }
    for (std::size_t i = 1; i < nm.size(); ++i)
        if (!(nm[i] > nm[i - 1]))
            throw_user(context + ": field 'wavelengths' is not strictly increasing at index " +
                       std::to_string(i));
    return WavelengthGrid(std::move(nm));
}

json read_cube_header(const std::string& base, std::size_t& width, std::size_t& height) {
    const std::string header_path = base + kHeaderSuffix;
    const json header = parse_json_file(header_path);
    if (!header.is_object())
        throw_user(header_path + ": header must be a JSON object");
    reject_unknown_fields(header,
                          {"width", "height", "wavelengths", "dtype", "layout", "byte_order"},
                          header_path);
    for (const char* f : {"width", "height", "dtype", "layout", "byte_order"})
        require_field(header, f, header_path);

    if (!header["width"].is_number_unsigned() || !header["height"].is_number_unsigned())
        throw_user(header_path + ": fields 'width'/'height' must be unsigned integers");
    width = header["width"].get<std::size_t>();
    height = header["height"].get<std::size_t>();
    if (header["dtype"] != "f32")
        throw_user(header_path + ": field 'dtype' must be \"f32\"");
    if (header["layout"] != "band-sequential")
        throw_user(header_path + ": field 'layout' must be \"band-sequential\"");
    if (header["byte_order"] != "little-endian")
        throw_user(header_path + ": field 'byte_order' must be \"little-endian\"");
    return header;
}

} // namespace

void write_cube(const SpectralCube& cube, const std::string& base_path) {
    const auto issues = validate_cube(cube);
    if (!issues.empty())
        throw_user("refusing to write invalid cube: " + issues.front().invariant + " (" +
                   issues.front().detail + ")");

    const std::string base = strip_suffix(base_path);
    json header;
    header["width"] = cube.width;
    header["height"] = cube.height;
    header["wavelengths"] = cube.grid.nm;
    header["dtype"] = "f32";
    header["layout"] = "band-sequential";
    header["byte_order"] = "little-endian";
    write_text_file(base + kHeaderSuffix, header.dump(2) + "\n");

    std::vector<float> payload = cube.data;
    to_little_endian(payload);
    std::ofstream out(base + kPayloadSuffix, std::ios::binary | std::ios::trunc);
    if (!out)
        throw_user("cannot open '" + base + kPayloadSuffix + "' for writing");
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out)
        throw_user("write to '" + base + kPayloadSuffix + "' failed");
}

SpectralCube read_cube(const std::string& path) {
    const std::string base = strip_suffix(path);
    SpectralCube cube;
    const json header = read_cube_header(base, cube.width, cube.height);
    cube.grid = grid_from_header(header, base + kHeaderSuffix);

    const std::string payload_path = base + kPayloadSuffix;
    std::ifstream in(payload_path, std::ios::binary | std::ios::ate);
    if (!in)
        throw_user("cannot open '" + payload_path + "' for reading");
    const std::streamsize bytes = in.tellg();
    in.seekg(0);

    const std::size_t expected = cube.width * cube.height * cube.grid.size();
    if (static_cast<std::size_t>(bytes) != expected * sizeof(float))
        throw_user(payload_path + ": payload length mismatch; header implies " +
                   std::to_string(expected * sizeof(float)) + " bytes, file holds " +
                   std::to_string(bytes));

    cube.data.resize(expected);
    in.read(reinterpret_cast<char*>(cube.data.data()), bytes);
    if (!in)
        throw_user("read from '" + payload_path + "' failed");
    to_little_endian(cube.data);
    return cube;
}

WavelengthGrid read_cube_grid(const std::string& path) {
    const std::string base = strip_suffix(path);
    std::size_t w = 0, h = 0;
    const json header = read_cube_header(base, w, h);
    return grid_from_header(header, base + kHeaderSuffix);
}

void write_labels(const LabelMap& labels, const std::string& path) {
    if (labels.classes.size() != labels.pixels())
        throw_user("label raster length does not match width*height");
    json j;
    j["width"] = labels.width;
    j["height"] = labels.height;
    j["classes"] = labels.classes;
    json table = json::object();
    for (const auto& [from, to] : labels.merge_table)
        table[std::to_string(from)] = to;
    j["merge_table"] = table;
    write_text_file(path, j.dump(2) + "\n");
}

LabelMap read_labels(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_object())
        throw_user(path + ": label map must be a JSON object");
    reject_unknown_fields(j, {"width", "height", "classes", "merge_table"}, path);
    for (const char* f : {"width", "height", "classes", "merge_table"})
        require_field(j, f, path);

    LabelMap labels;
    labels.width = j["width"].get<std::size_t>();
    labels.height = j["height"].get<std::size_t>();
    if (!j["classes"].is_array())
        throw_user(path + ": field 'classes' must be an array");
    labels.classes = j["classes"].get<std::vector<std::int32_t>>();
    if (labels.classes.size() != labels.pixels())
        throw_user(path + ": 'classes' holds " + std::to_string(labels.classes.size()) +
                   " entries, expected " + std::to_string(labels.pixels()));
    if (!j["merge_table"].is_object())
        throw_user(path + ": field 'merge_table' must be an object");
    for (const auto& [key, value] : j["merge_table"].items()) {
        std::int32_t from = 0;
        const auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), from);
        if (ec != std::errc() || p != key.data() + key.size())
            throw_user(path + ": merge_table key '" + key + "' is not an integer");
        labels.merge_table[from] = value.get<std::int32_t>();
    }
    return labels;
}

DatasetManifest read_manifest(const std::string& path) {
    namespace fs = std::filesystem;
    const json j = parse_json_file(path);
    if (!j.is_object())
        throw_user(path + ": manifest must be a JSON object");
    reject_unknown_fields(j, {"entries", "reference_name"}, path);
    require_field(j, "entries", path);
    require_field(j, "reference_name", path);
    if (!j["entries"].is_array() || j["entries"].empty())
        throw_user(path + ": field 'entries' must be a non-empty array");

    DatasetManifest manifest;
    manifest.reference_name = j["reference_name"].get<std::string>();
    for (const auto& e : j["entries"]) {
        if (!e.is_object())
            throw_user(path + ": each entry must be a JSON object");
        reject_unknown_fields(e, {"cube_path", "label_path", "name", "native_resolution_nm"},
                              path);
        ManifestEntry entry;
        entry.cube_path = require_field(e, "cube_path", path).get<std::string>();
        entry.name = require_field(e, "name", path).get<std::string>();
        entry.native_resolution_nm =
            require_field(e, "native_resolution_nm", path).get<double>();
        if (e.contains("label_path"))
            entry.label_path = e["label_path"].get<std::string>();
        if (entry.cube_path.empty())
            throw_user(path + ": entry '" + entry.name + "' has an empty cube_path");
        if (entry.name.empty())
            throw_user(path + ": entries must carry non-empty names");
        for (const auto& other : manifest.entries)
            if (other.name == entry.name)
                throw_user(path + ": duplicate dataset name '" + entry.name + "'");
        manifest.entries.push_back(std::move(entry));
    }
    manifest.reference(); // reference_name must match exactly one entry

    // relative entry paths resolve against the manifest's directory, so a
    // dataset folder can move as a unit
    const fs::path base = fs::path(path).parent_path();
    for (auto& entry : manifest.entries) {
        if (!entry.cube_path.empty() && fs::path(entry.cube_path).is_relative())
            entry.cube_path = (base / entry.cube_path).string();
        if (!entry.label_path.empty() && fs::path(entry.label_path).is_relative())
            entry.label_path = (base / entry.label_path).string();
    }
    return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
    json j;
    j["reference_name"] = manifest.reference_name;
    j["entries"] = json::array();
    for (const auto& e : manifest.entries) {
        json entry;
        entry["cube_path"] = e.cube_path;
        entry["name"] = e.name;
        entry["native_resolution_nm"] = e.native_resolution_nm;
        if (!e.label_path.empty())
            entry["label_path"] = e.label_path;
        j["entries"].push_back(entry);
    }
    write_text_file(path, j.dump(2) + "\n");
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw_user("cannot open '" + path + "' for hashing");
    std::uint64_t hash = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
        if (!in)
            break;
    }
    std::ostringstream out;
    out << std::hex;
    for (int shift = 60; shift >= 0; shift -= 4)
        out << ((hash >> shift) & 0xF);
    return out.str();
}

PlotBundle export_pixel_plot(const std::vector<std::pair<std::string, SpectralPixel>>& pixels) {
    if (pixels.empty())
        throw_user("pixel plot export requires at least one series");
    PlotBundle bundle;
    bundle.kind = PlotBundle::Kind::Pixel2D;
    for (const auto& [name, pixel] : pixels) {
        if (pixel.values.size() != pixel.grid.size())
            throw_user("series '" + name + "' value count does not match its grid");
        PlotSeries s;
        s.name = name;
        s.x = pixel.grid.nm;
        s.y = pixel.values;
        bundle.series.push_back(std::move(s));
    }
    return bundle;
}

PlotBundle export_surface_plot(const SpectralCube& cube, BandReduction reduction) {
    if (cube.data.size() != cube.pixels() * cube.bands())
        throw_user("cube data length does not match width*height*bands");
    if (cube.bands() == 0)
        throw_user("surface plot of a cube with no bands");
    PlotBundle bundle;
    bundle.kind = PlotBundle::Kind::Surface3D;
    bundle.width = cube.width;
    bundle.height = cube.height;
    bundle.z.assign(cube.pixels(), 0.0);
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        const float* plane = cube.plane(b);
        for (std::size_t p = 0; p < cube.pixels(); ++p)
            bundle.z[p] += static_cast<double>(plane[p]);
    }
    if (reduction == BandReduction::Mean) {
        const double inv = 1.0 / static_cast<double>(cube.bands());
        for (double& v : bundle.z)
            v *= inv;
    }
    bundle.metadata["reduction"] = reduction == BandReduction::Mean ? "mean" : "sum";
    return bundle;
}

std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw_internal("float formatting failed");
    return std::string(buf, p);
}

std::string format_float(float v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw_internal("float formatting failed");
    return std::string(buf, p);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw_user("'" + s + "' is not a number");
    return v;
}

void write_plot_csv(const PlotBundle& bundle, const std::string& path) {
    std::ostringstream out;
    if (bundle.kind == PlotBundle::Kind::Pixel2D) {
        out << "series,wavelength_nm,value\n";
        for (const auto& s : bundle.series)
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << s.name << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i])
                    << '\n';
    } else {
        out << "row,col,value\n";
        for (std::size_t r = 0; r < bundle.height; ++r)
            for (std::size_t c = 0; c < bundle.width; ++c)
                out << r << ',' << c << ',' << format_double(bundle.z[r * bundle.width + c])
                    << '\n';
    }
    write_text_file(path, out.str());
}

void write_plot_json(const PlotBundle& bundle, const std::string& path) {
    json j;
    j["kind"] = bundle.kind == PlotBundle::Kind::Pixel2D ? "pixel2d" : "surface3d";
    j["metadata"] = bundle.metadata;
    if (bundle.kind == PlotBundle::Kind::Pixel2D) {
        j["series"] = json::array();
        for (const auto& s : bundle.series) {
            json e;
            e["name"] = s.name;
            e["x"] = s.x;
            e["y"] = s.y;
            j["series"].push_back(e);
        }
    } else {
        j["width"] = bundle.width;
        j["height"] = bundle.height;
        j["z"] = bundle.z;
    }
    write_text_file(path, j.dump(2) + "\n");
}

PlotBundle read_plot_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw_user("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line))
        throw_user(path + ": empty plot file");

    PlotBundle bundle;
    if (line == "series,wavelength_nm,value") {
        bundle.kind = PlotBundle::Kind::Pixel2D;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const std::size_t c1 = line.find(',');
            const std::size_t c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw_user(path + ": malformed row '" + line + "'");
            const std::string name = line.substr(0, c1);
            const double x = parse_double(line.substr(c1 + 1, c2 - c1 - 1));
            const double y = parse_double(line.substr(c2 + 1));
            if (bundle.series.empty() || bundle.series.back().name != name) {
                PlotSeries s;
                s.name = name;
                bundle.series.push_back(std::move(s));
            }
            bundle.series.back().x.push_back(x);
            bundle.series.back().y.push_back(y);
        }
    } else if (line == "row,col,value") {
        bundle.kind = PlotBundle::Kind::Surface3D;
        std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
        std::size_t max_r = 0, max_c = 0;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const std::size_t c1 = line.find(',');
            const std::size_t c2 = line.find(',', c1 + 1);
            const std::size_t r = static_cast<std::size_t>(std::stoull(line.substr(0, c1)));
            const std::size_t c = static_cast<std::size_t>(
                std::stoull(line.substr(c1 + 1, c2 - c1 - 1)));
            const double v = parse_double(line.substr(c2 + 1));
            cells.emplace_back(r, c, v);
            max_r = std::max(max_r, r);
            max_c = std::max(max_c, c);
        }
        bundle.height = cells.empty() ? 0 : max_r + 1;
        bundle.width = cells.empty() ? 0 : max_c + 1;
        bundle.z.assign(bundle.width * bundle.height, 0.0);
        for (const auto& [r, c, v] : cells)
            bundle.z[r * bundle.width + c] = v;
    } else {
        throw_user(path + ": unrecognized plot header '" + line + "'");
    }
    return bundle;
}

} // namespace specfuse
