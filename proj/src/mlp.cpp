#include "specfuse/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>

#include "specfuse/io.hpp"
#include "specfuse/kern/kernels.hpp"

namespace specfuse::mlp {

using nlohmann::json;

namespace {

constexpr double kProbFloor = 1e-12;

double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Plain-loop layer math mirroring the scalar kernels; the float fast path
// swaps these for the dispatched kernels.
template <class T>
void dense_forward_loops(const T* x, const T* w, const T* bias, T* y, std::size_t batch,
                         std::size_t in, std::size_t out) {
    for (std::size_t bt = 0; bt < batch; ++bt) {
        T* yr = y + bt * out;
        const T* xr = x + bt * in;
        for (std::size_t o = 0; o < out; ++o)
            yr[o] = bias[o];
        for (std::size_t k = 0; k < in; ++k) {
            const T xv = xr[k];
            const T* wr = w + k * out;
            for (std::size_t o = 0; o < out; ++o)
                yr[o] += xv * wr[o];
        }
    }
}

template <class T>
void dense_dx_loops(const T* dy, const T* w, T* dx, std::size_t batch, std::size_t in,
                    std::size_t out) {
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const T* dyr = dy + bt * out;
        T* dxr = dx + bt * in;
        for (std::size_t k = 0; k < in; ++k) {
            const T* wr = w + k * out;
            T acc = T(0);
            for (std::size_t o = 0; o < out; ++o)
                acc += dyr[o] * wr[o];
            dxr[k] = acc;
        }
    }
}

template <class T>
void dense_dw_loops(const T* x, const T* dy, T* dw, std::size_t batch, std::size_t in,
                    std::size_t out) {
    std::fill(dw, dw + in * out, T(0));
    for (std::size_t bt = 0; bt < batch; ++bt) {
        const T* xr = x + bt * in;
        const T* dyr = dy + bt * out;
        for (std::size_t k = 0; k < in; ++k) {
            const T xv = xr[k];
            T* dwr = dw + k * out;
            for (std::size_t o = 0; o < out; ++o)
                dwr[o] += xv * dyr[o];
        }
    }
}

template <class T>
void check_labels(std::span<const std::uint8_t> labels) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != kClassVegetation && labels[i] != kClassNonVegetation)
            throw_user("label[" + std::to_string(i) + "] = " + std::to_string(labels[i]) +
                       " outside {1, 2}");
}

} // namespace

MlpArchitecture MlpArchitecture::preset_66() { return {66, {128, 256, 512, 256}, 2}; }
MlpArchitecture MlpArchitecture::preset_103() { return {103, {256, 512, 256, 128}, 2}; }

void MlpArchitecture::validate() const {
    if (input_size < 1)
        throw_user("architecture input size must be at least 1");
    for (std::size_t h : hidden_sizes)
        if (h < 1)
            throw_user("architecture hidden sizes must be at least 1");
    if (output_size != 2)
        throw_user("the classifier is binary; output size must be 2, got " +
                   std::to_string(output_size));
}

std::vector<std::size_t> MlpArchitecture::layer_dims() const {
    std::vector<std::size_t> dims;
    dims.push_back(input_size);
    dims.insert(dims.end(), hidden_sizes.begin(), hidden_sizes.end());
    dims.push_back(output_size);
    return dims;
}

void TrainConfig::validate() const {
    if (epochs < 1)
        throw_user("epochs must be at least 1");
    if (batch_size < 1)
        throw_user("batch size must be at least 1");
    if (!(learning_rate > 0.0f))
        throw_user("learning rate must be positive");
}

template <class T>
BasicModel<T> init_model_t(const MlpArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    BasicModel<T> model;
    model.arch = arch;
    std::mt19937_64 rng(seed);

    const auto dims = arch.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        BasicDenseLayer<T> layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.w.resize(layer.in * layer.out);
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.in));
        for (T& v : layer.w)
            v = static_cast<T>((2.0 * unit_double(rng) - 1.0) * limit);
        layer.b.assign(layer.out, T(0));
        layer.mw.assign(layer.w.size(), T(0));
        layer.vw.assign(layer.w.size(), T(0));
        layer.mb.assign(layer.out, T(0));
        layer.vb.assign(layer.out, T(0));
        model.layers.push_back(std::move(layer));
    }
    return model;
}

MlpModel init_model(const MlpArchitecture& arch, std::uint64_t seed) {
    return init_model_t<float>(arch, seed);
}

template <class T>
std::vector<T> forward_t(const BasicModel<T>& model, const T* features, std::size_t batch,
                         BasicCache<T>* cache) {
    if (batch == 0)
        throw_user("forward pass over an empty batch");
    const std::size_t L = model.layers.size();

    BasicCache<T> local;
    BasicCache<T>& c = cache ? *cache : local;
    c.batch = batch;
    c.acts.assign(L + 1, {});
    c.acts[0].assign(features, features + batch * model.arch.input_size);

    for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = model.layers[l];
        auto& out = c.acts[l + 1];
        out.resize(batch * layer.out);

        if constexpr (std::is_same_v<T, float>) {
            const auto& kt = kern::active();
            kt.dense_forward(c.acts[l].data(), layer.w.data(), layer.b.data(), out.data(),
                             batch, layer.in, layer.out);
            if (l + 1 < L)
                kt.relu(out.data(), out.size());
        } else {
            dense_forward_loops<T>(c.acts[l].data(), layer.w.data(), layer.b.data(), out.data(),
                                   batch, layer.in, layer.out);
            if (l + 1 < L)
                for (T& v : out)
                    v = v > T(0) ? v : T(0);
        }

        if (l + 1 == L) {
            // max-stabilized softmax per row
            const std::size_t ncls = layer.out;
            for (std::size_t bt = 0; bt < batch; ++bt) {
                T* row = out.data() + bt * ncls;
                T mx = row[0];
                for (std::size_t o = 1; o < ncls; ++o)
                    mx = std::max(mx, row[o]);
                T sum = T(0);
                for (std::size_t o = 0; o < ncls; ++o) {
                    row[o] = std::exp(row[o] - mx);
                    sum += row[o];
                }
                const T inv = T(1) / sum;
                for (std::size_t o = 0; o < ncls; ++o)
                    row[o] *= inv;
            }
        }
    }
    return c.acts[L];
}

std::vector<float> forward(const MlpModel& model, std::span<const float> features,
                           std::size_t batch, ForwardCache* cache) {
    if (features.size() != batch * model.arch.input_size)
        throw_user("feature buffer holds " + std::to_string(features.size()) +
                   " values, expected " + std::to_string(batch * model.arch.input_size));
    return forward_t<float>(model, features.data(), batch, cache);
}

template <class T>
double cross_entropy_t(std::span<const T> probs, std::span<const std::uint8_t> labels,
                       std::size_t ncls) {
    if (probs.size() != labels.size() * ncls)
        throw_user("probability buffer does not match label count");
    if (labels.empty())
        throw_user("cross entropy over an empty batch");
    check_labels<T>(labels);
    double acc = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = static_cast<double>(probs[i * ncls + (labels[i] - 1)]);
        acc += -std::log(std::max(p, kProbFloor));
    }
    return acc / static_cast<double>(labels.size());
}

double cross_entropy(std::span<const float> probs, std::span<const std::uint8_t> labels) {
    return cross_entropy_t<float>(probs, labels, 2);
}

template <class T>
BasicGradients<T> backward_t(const BasicModel<T>& model, const BasicCache<T>& cache,
                             std::span<const std::uint8_t> labels) {
    const std::size_t L = model.layers.size();
    const std::size_t batch = cache.batch;
    if (cache.acts.size() != L + 1)
        throw_user("forward cache does not match the model");
    if (labels.size() != batch)
        throw_user("label count " + std::to_string(labels.size()) +
                   " does not match cached batch " + std::to_string(batch));
    check_labels<T>(labels);

    const std::size_t ncls = model.layers.back().out;
    std::vector<T> delta(batch * ncls);
    const T invb = T(1) / static_cast<T>(batch);
    for (std::size_t bt = 0; bt < batch; ++bt)
        for (std::size_t o = 0; o < ncls; ++o) {
            const T onehot = (static_cast<std::size_t>(labels[bt] - 1) == o) ? T(1) : T(0);
            delta[bt * ncls + o] = (cache.acts[L][bt * ncls + o] - onehot) * invb;
        }

    BasicGradients<T> grads;
    grads.layers.resize(L);

    for (std::size_t l = L; l-- > 0;) {
        const auto& layer = model.layers[l];
        auto& g = grads.layers[l];
        g.dw.resize(layer.in * layer.out);
        g.db.resize(layer.out);

        if constexpr (std::is_same_v<T, float>) {
            const auto& kt = kern::active();
            kt.dense_dw(cache.acts[l].data(), delta.data(), g.dw.data(), batch, layer.in,
                        layer.out);
            kt.bias_grad(delta.data(), g.db.data(), batch, layer.out);
            if (l > 0) {
                std::vector<T> dx(batch * layer.in);
                kt.dense_dx(delta.data(), layer.w.data(), dx.data(), batch, layer.in, layer.out);
                kt.relu_bwd(cache.acts[l].data(), dx.data(), dx.size());
                delta = std::move(dx);
            }
        } else {
            dense_dw_loops<T>(cache.acts[l].data(), delta.data(), g.dw.data(), batch, layer.in,
                              layer.out);
            std::fill(g.db.begin(), g.db.end(), T(0));
            for (std::size_t bt = 0; bt < batch; ++bt)
                for (std::size_t o = 0; o < layer.out; ++o)
                    g.db[o] += delta[bt * layer.out + o];
            if (l > 0) {
                std::vector<T> dx(batch * layer.in);
                dense_dx_loops<T>(delta.data(), layer.w.data(), dx.data(), batch, layer.in,
                                  layer.out);
                for (std::size_t i = 0; i < dx.size(); ++i)
                    dx[i] = cache.acts[l][i] > T(0) ? dx[i] : T(0);
                delta = std::move(dx);
            }
        }
    }
    return grads;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const std::uint8_t> labels) {
    return backward_t<float>(model, cache, labels);
}

template <class T>
void adam_step_t(BasicModel<T>& model, const BasicGradients<T>& grads, const TrainConfig& cfg) {
    if (grads.layers.size() != model.layers.size())
        throw_user("gradient layer count does not match the model");
    const std::uint64_t t = model.step + 1;
    const double b1 = static_cast<double>(cfg.adam.beta1);
    const double b2 = static_cast<double>(cfg.adam.beta2);
    const T inv_bc1 = static_cast<T>(1.0 / (1.0 - std::pow(b1, static_cast<double>(t))));
    const T inv_bc2 = static_cast<T>(1.0 / (1.0 - std::pow(b2, static_cast<double>(t))));

    auto update_loops = [&](std::vector<T>& w, std::vector<T>& m, std::vector<T>& v,
                            const std::vector<T>& g) {
        const T beta1 = static_cast<T>(cfg.adam.beta1);
        const T beta2 = static_cast<T>(cfg.adam.beta2);
        const T eps = static_cast<T>(cfg.adam.eps);
        const T lr = static_cast<T>(cfg.learning_rate);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const T gi = g[i];
            m[i] = beta1 * m[i] + (T(1) - beta1) * gi;
            v[i] = beta2 * v[i] + (T(1) - beta2) * (gi * gi);
            const T mhat = m[i] * inv_bc1;
            const T vhat = v[i] * inv_bc2;
            w[i] = w[i] - lr * (mhat / (std::sqrt(vhat) + eps));
        }
    };

    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        const auto& g = grads.layers[l];
        if (g.dw.size() != layer.w.size() || g.db.size() != layer.b.size())
            throw_user("gradient shapes do not match layer " + std::to_string(l));

        if constexpr (std::is_same_v<T, float>) {
            const auto& kt = kern::active();
            kt.adam_update(layer.w.data(), layer.mw.data(), layer.vw.data(), g.dw.data(),
                           layer.w.size(), cfg.learning_rate, cfg.adam.beta1, cfg.adam.beta2,
                           cfg.adam.eps, inv_bc1, inv_bc2);
            kt.adam_update(layer.b.data(), layer.mb.data(), layer.vb.data(), g.db.data(),
                           layer.b.size(), cfg.learning_rate, cfg.adam.beta1, cfg.adam.beta2,
                           cfg.adam.eps, inv_bc1, inv_bc2);
        } else {
            update_loops(layer.w, layer.mw, layer.vw, g.dw);
            update_loops(layer.b, layer.mb, layer.vb, g.db);
        }
    }
    model.step = t;
}

void adam_step(MlpModel& model, const Gradients& grads, const TrainConfig& cfg) {
    adam_step_t<float>(model, grads, cfg);
}

std::vector<EpochStats> train(MlpModel& model, const SampleSet& samples, const TrainConfig& cfg) {
    cfg.validate();
    if (samples.size() == 0)
        throw_user("training set is empty");
    if (samples.feature_width != model.arch.input_size)
        throw_user("training data holds " + std::to_string(samples.feature_width) +
                   " bands but the model expects " + std::to_string(model.arch.input_size));

    const std::size_t n = samples.size();
    const std::size_t width = samples.feature_width;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::mt19937_64 rng(cfg.seed);

    std::vector<EpochStats> history;
    history.reserve(cfg.epochs);
    std::vector<float> xb;
    std::vector<std::uint8_t> yb;
    ForwardCache cache;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (n > 1)
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
                std::swap(order[i], order[j]);
            }

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bs = std::min(cfg.batch_size, n - start);
            xb.resize(bs * width);
            yb.resize(bs);
            for (std::size_t i = 0; i < bs; ++i) {
                const std::size_t s = order[start + i];
                std::copy_n(samples.row(s), width, xb.data() + i * width);
                yb[i] = samples.labels[s];
            }

            const std::vector<float> probs = forward_t<float>(model, xb.data(), bs, &cache);
            loss_sum += cross_entropy(probs, yb) * static_cast<double>(bs);
            for (std::size_t i = 0; i < bs; ++i) {
                const std::size_t pred = probs[i * 2] >= probs[i * 2 + 1] ? 0 : 1;
                if (pred == static_cast<std::size_t>(yb[i] - 1))
                    ++correct;
            }

            const Gradients grads = backward(model, cache, yb);
            adam_step(model, grads, cfg);
        }
        history.push_back({loss_sum / static_cast<double>(n),
                           static_cast<double>(correct) / static_cast<double>(n)});
    }
    return history;
}

EvalResult evaluate(const MlpModel& model, const SampleSet& samples) {
    if (samples.size() == 0)
        throw_user("evaluation set is empty");
    if (samples.feature_width != model.arch.input_size)
        throw_user("evaluation data holds " + std::to_string(samples.feature_width) +
                   " bands but the model expects " + std::to_string(model.arch.input_size));

    EvalResult res;
    res.total = samples.size();
    const std::size_t chunk = 4096;
    ForwardCache cache;
    for (std::size_t start = 0; start < samples.size(); start += chunk) {
        const std::size_t bs = std::min(chunk, samples.size() - start);
        const std::vector<float> probs =
            forward_t<float>(model, samples.row(start), bs, &cache);
        for (std::size_t i = 0; i < bs; ++i) {
            const std::size_t truth = samples.labels[start + i] - 1;
            const std::size_t pred = probs[i * 2] >= probs[i * 2 + 1] ? 0 : 1;
            res.confusion[truth][pred] += 1;
        }
    }
    res.accuracy = static_cast<double>(res.confusion[0][0] + res.confusion[1][1]) /
                   static_cast<double>(res.total);
    return res;
}

namespace {

constexpr const char* kCkptHeaderSuffix = ".mlp.json";
constexpr const char* kCkptBlobSuffix = ".mlp.bin";

std::string ckpt_base(const std::string& path) {
    for (const char* suffix : {kCkptHeaderSuffix, kCkptBlobSuffix}) {
        const std::size_t len = std::strlen(suffix);
        if (path.size() > len && path.compare(path.size() - len, len, suffix) == 0)
            return path.substr(0, path.size() - len);
    }
    return path;
}

void append_f32(std::vector<float>& blob, const std::vector<float>& v) {
    blob.insert(blob.end(), v.begin(), v.end());
}

} // namespace

void save_checkpoint(const MlpModel& model, const TrainConfig& cfg,
                     const std::string& base_path) {
    const std::string base = ckpt_base(base_path);

    json header;
    header["format"] = "specfuse-mlp";
    header["version"] = 1;
    header["architecture"] = {{"input_size", model.arch.input_size},
                              {"hidden_sizes", model.arch.hidden_sizes},
                              {"output_size", model.arch.output_size}};
    header["step"] = model.step;
    header["train_config"] = {{"epochs", cfg.epochs},
                              {"learning_rate", cfg.learning_rate},
                              {"batch_size", cfg.batch_size},
                              {"seed", cfg.seed},
                              {"beta1", cfg.adam.beta1},
                              {"beta2", cfg.adam.beta2},
                              {"eps", cfg.adam.eps}};

    std::vector<float> blob;
    for (const auto& layer : model.layers) {
        append_f32(blob, layer.w);
        append_f32(blob, layer.b);
        append_f32(blob, layer.mw);
        append_f32(blob, layer.vw);
        append_f32(blob, layer.mb);
        append_f32(blob, layer.vb);
    }
    header["blob_values"] = blob.size();

    {
        std::ofstream out(base + kCkptHeaderSuffix, std::ios::binary | std::ios::trunc);
        if (!out)
            throw_user("cannot open '" + base + kCkptHeaderSuffix + "' for writing");
        out << header.dump(2) << "\n";
    }
    if constexpr (std::endian::native == std::endian::big)
        for (float& f : blob) {
            auto u = std::bit_cast<std::uint32_t>(f);
            u = __builtin_bswap32(u);
            f = std::bit_cast<float>(u);
        }
    std::ofstream out(base + kCkptBlobSuffix, std::ios::binary | std::ios::trunc);
    if (!out)
        throw_user("cannot open '" + base + kCkptBlobSuffix + "' for writing");
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(float)));
    if (!out)
        throw_user("write to '" + base + kCkptBlobSuffix + "' failed");
}

MlpModel load_checkpoint(const std::string& path, TrainConfig* cfg_out) {
    const std::string base = ckpt_base(path);
    std::ifstream hin(base + kCkptHeaderSuffix, std::ios::binary);
    if (!hin)
        throw_user("cannot open '" + base + kCkptHeaderSuffix + "' for reading");
    json header = json::parse(hin, nullptr, false);
    if (header.is_discarded() || !header.is_object())
        throw_user(base + kCkptHeaderSuffix + " is not valid JSON");
    if (header.value("format", "") != "specfuse-mlp")
        throw_user(base + kCkptHeaderSuffix + ": not a specfuse-mlp checkpoint");

    MlpArchitecture arch;
    arch.input_size = header["architecture"]["input_size"].get<std::size_t>();
    arch.hidden_sizes = header["architecture"]["hidden_sizes"].get<std::vector<std::size_t>>();
    arch.output_size = header["architecture"]["output_size"].get<std::size_t>();
    arch.validate();

    if (cfg_out) {
        const json& tc = header["train_config"];
        cfg_out->epochs = tc["epochs"].get<std::size_t>();
        cfg_out->learning_rate = tc["learning_rate"].get<float>();
        cfg_out->batch_size = tc["batch_size"].get<std::size_t>();
        cfg_out->seed = tc["seed"].get<std::uint64_t>();
        cfg_out->adam.beta1 = tc["beta1"].get<float>();
        cfg_out->adam.beta2 = tc["beta2"].get<float>();
        cfg_out->adam.eps = tc["eps"].get<float>();
    }

    MlpModel model = init_model(arch, 0);
    model.step = header["step"].get<std::uint64_t>();

    std::size_t expected = 0;
    for (const auto& layer : model.layers)
        expected += layer.w.size() + layer.b.size() + layer.mw.size() + layer.vw.size() +
                    layer.mb.size() + layer.vb.size();
    if (header.contains("blob_values") &&
        header["blob_values"].get<std::size_t>() != expected)
        throw_user(base + kCkptHeaderSuffix + ": blob_values does not match the architecture");

    std::ifstream bin(base + kCkptBlobSuffix, std::ios::binary | std::ios::ate);
    if (!bin)
        throw_user("cannot open '" + base + kCkptBlobSuffix + "' for reading");
    const std::streamsize bytes = bin.tellg();
    if (static_cast<std::size_t>(bytes) != expected * sizeof(float))
        throw_user(base + kCkptBlobSuffix + ": blob length mismatch; expected " +
                   std::to_string(expected * sizeof(float)) + " bytes, got " +
                   std::to_string(bytes));
    bin.seekg(0);

    std::vector<float> blob(expected);
    bin.read(reinterpret_cast<char*>(blob.data()), bytes);
    if (!bin)
        throw_user("read from '" + base + kCkptBlobSuffix + "' failed");
    if constexpr (std::endian::native == std::endian::big)
        for (float& f : blob) {
            auto u = std::bit_cast<std::uint32_t>(f);
            u = __builtin_bswap32(u);
            f = std::bit_cast<float>(u);
        }

    std::size_t off = 0;
    auto take = [&](std::vector<float>& dst) {
        std::copy_n(blob.data() + off, dst.size(), dst.data());
        off += dst.size();
    };
    for (auto& layer : model.layers) {
        take(layer.w);
        take(layer.b);
        take(layer.mw);
        take(layer.vw);
        take(layer.mb);
        take(layer.vb);
    }
    return model;
}

void write_history_csv(std::span<const EpochStats> history, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw_user("cannot open '" + path + "' for writing");
    out << "epoch,loss,accuracy\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << (i + 1) << ',' << format_double(history[i].loss) << ','
            << format_double(history[i].accuracy) << '\n';
}

// explicit instantiations: float is the production path, double backs the
// finite-difference gradient verification
template BasicModel<float> init_model_t<float>(const MlpArchitecture&, std::uint64_t);
template BasicModel<double> init_model_t<double>(const MlpArchitecture&, std::uint64_t);
template std::vector<float> forward_t<float>(const BasicModel<float>&, const float*, std::size_t,
                                             BasicCache<float>*);
template std::vector<double> forward_t<double>(const BasicModel<double>&, const double*,
                                               std::size_t, BasicCache<double>*);
template double cross_entropy_t<float>(std::span<const float>, std::span<const std::uint8_t>,
                                       std::size_t);
template double cross_entropy_t<double>(std::span<const double>, std::span<const std::uint8_t>,
                                        std::size_t);
template BasicGradients<float> backward_t<float>(const BasicModel<float>&,
                                                 const BasicCache<float>&,
                                                 std::span<const std::uint8_t>);
template BasicGradients<double> backward_t<double>(const BasicModel<double>&,
                                                   const BasicCache<double>&,
                                                   std::span<const std::uint8_t>);
template void adam_step_t<float>(BasicModel<float>&, const BasicGradients<float>&,
                                 const TrainConfig&);
template void adam_step_t<double>(BasicModel<double>&, const BasicGradients<double>&,
                                  const TrainConfig&);

} // namespace specfuse::mlp
