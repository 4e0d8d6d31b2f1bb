#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specfuse/fusion.hpp"

namespace specfuse::mlp {

struct MlpArchitecture {
    std::size_t input_size = 0;
    std::vector<std::size_t> hidden_sizes;
    std::size_t output_size = 2;

    /// 66-band classifier: hidden layers 128, 256, 512, 256.
    static MlpArchitecture preset_66();
    /// 103-band variant: hidden layers 256, 512, 256, 128.
    static MlpArchitecture preset_103();

    void validate() const;
    std::vector<std::size_t> layer_dims() const;

    bool operator==(const MlpArchitecture&) const = default;
};

struct AdamConfig {
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

struct TrainConfig {
    std::size_t epochs = 150;
    float learning_rate = 1e-4f;
    std::size_t batch_size = 2048;
    std::uint64_t seed = 0;
    AdamConfig adam;

    void validate() const;
};

template <class T>
struct BasicDenseLayer {
    std::size_t in = 0, out = 0;
    std::vector<T> w; // [in][out], output dimension contiguous
    std::vector<T> b;
    std::vector<T> mw, vw, mb, vb; // Adam moments, shaped like w / b
};

template <class T>
struct BasicModel {
    MlpArchitecture arch;
    std::vector<BasicDenseLayer<T>> layers;
    std::uint64_t step = 0;
};
using MlpModel = BasicModel<float>;

template <class T>
struct BasicCache {
    // acts[0] = batch input, acts[1..L-1] = post-ReLU hidden activations,
    // acts[L] = class probabilities
    std::vector<std::vector<T>> acts;
    std::size_t batch = 0;
};
using ForwardCache = BasicCache<float>;

template <class T>
struct BasicGradients {
    struct Layer {
        std::vector<T> dw, db;
    };
    std::vector<Layer> layers;
};
using Gradients = BasicGradients<float>;

// Weights are fan-in scaled uniform on +/- sqrt(6 / fan_in), biases zero,
// deterministic per seed. The double instantiation exists for the
// finite-difference gradient verification.
template <class T>
BasicModel<T> init_model_t(const MlpArchitecture& arch, std::uint64_t seed);
MlpModel init_model(const MlpArchitecture& arch, std::uint64_t seed);

/// Hidden layers: affine + ReLU; output: affine + max-stabilized softmax.
/// Returns batch x output_size probabilities (rows sum to 1).
template <class T>
std::vector<T> forward_t(const BasicModel<T>& model, const T* features, std::size_t batch,
                         BasicCache<T>* cache);
std::vector<float> forward(const MlpModel& model, std::span<const float> features,
                           std::size_t batch, ForwardCache* cache = nullptr);

/// Mean of -log p[true class] with p clamped below at 1e-12. Labels are the
/// merged class codes 1|2.
template <class T>
double cross_entropy_t(std::span<const T> probs, std::span<const std::uint8_t> labels,
                       std::size_t ncls);
double cross_entropy(std::span<const float> probs, std::span<const std::uint8_t> labels);

/// Exact gradients of the mean cross-entropy; softmax and loss fuse to
/// (p - onehot) / batch at the output.
template <class T>
BasicGradients<T> backward_t(const BasicModel<T>& model, const BasicCache<T>& cache,
                             std::span<const std::uint8_t> labels);
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const std::uint8_t> labels);

template <class T>
void adam_step_t(BasicModel<T>& model, const BasicGradients<T>& grads, const TrainConfig& cfg);
void adam_step(MlpModel& model, const Gradients& grads, const TrainConfig& cfg);

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// epochs x (shuffle, batch, forward, backward, adam). Deterministic per
/// cfg.seed. Returns one loss/accuracy entry per epoch.
std::vector<EpochStats> train(MlpModel& model, const SampleSet& samples, const TrainConfig& cfg);

struct EvalResult {
    double accuracy = 0.0;
    std::size_t total = 0;
    // confusion[true class - 1][predicted class - 1]
    std::array<std::array<std::size_t, 2>, 2> confusion{{{0, 0}, {0, 0}}};
};
EvalResult evaluate(const MlpModel& model, const SampleSet& samples);

// Checkpoint container: <base>.mlp.json header + <base>.mlp.bin raw f32
// little-endian blob (per layer: w, b, mw, vw, mb, vb).
void save_checkpoint(const MlpModel& model, const TrainConfig& cfg, const std::string& base_path);
MlpModel load_checkpoint(const std::string& path, TrainConfig* cfg_out = nullptr);

void write_history_csv(std::span<const EpochStats> history, const std::string& path);

} // namespace specfuse::mlp
