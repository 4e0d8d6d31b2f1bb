#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "specfuse/mlp.hpp"
#include "support/oracles.hpp"

using namespace specfuse;
using namespace specfuse::mlp;
namespace fs = std::filesystem;

namespace {

// Linearly separable two-class spectra: class 1 high in the first half of
// the bands, class 2 high in the second half, small jitter.
SampleSet separable_blobs(std::size_t n, std::size_t width, std::uint64_t seed,
                          double margin = 4.0) {
    std::mt19937_64 rng(seed);
    SampleSet set;
    set.feature_width = width;
    set.wavelengths.resize(width);
    for (std::size_t b = 0; b < width; ++b)
        set.wavelengths[b] = 430.0 + 4.0 * static_cast<double>(b);
    set.dataset_names = {"blobs"};
    for (std::size_t i = 0; i < n; ++i) {
        const bool veg = (i % 2 == 0);
        for (std::size_t b = 0; b < width; ++b) {
            const bool first_half = b < width / 2;
            double base = (veg == first_half) ? margin : 0.0;
            base += oracle::uniform(rng, -0.5, 0.5);
            set.features.push_back(static_cast<float>(base));
        }
        set.labels.push_back(veg ? 1 : 2);
        set.provenance.push_back(0);
    }
    return set;
}

} // namespace

TEST_CASE("init_model shapes and determinism") {
    MlpArchitecture arch{2, {3}, 2};
    const auto m = init_model(arch, 9);
    REQUIRE(m.layers.size() == 2);
    CHECK(m.layers[0].in == 2);
    CHECK(m.layers[0].out == 3);
    CHECK(m.layers[0].w.size() == 6);
    CHECK(m.layers[0].b.size() == 3);
    CHECK(m.layers[1].in == 3);
    CHECK(m.layers[1].out == 2);
    for (float b : m.layers[0].b)
        CHECK(b == 0.0f);

    const auto m2 = init_model(arch, 9);
    CHECK(m.layers[0].w == m2.layers[0].w);
    const auto m3 = init_model(arch, 10);
    CHECK(m.layers[0].w != m3.layers[0].w);
}

TEST_CASE("init_model draws stay inside the fan-in bound") {
    MlpArchitecture arch{66, {160}, 2};
    const auto m = init_model(arch, 4);
    const float limit = std::sqrt(6.0f / 66.0f);
    float lo = 0.0f, hi = 0.0f;
    for (float w : m.layers[0].w) {
        CHECK(std::abs(w) <= limit);
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    // 10k+ draws should come close to both ends of the interval
    CHECK(lo < -0.9f * limit);
    CHECK(hi > 0.9f * limit);
}

TEST_CASE("forward with zero weights gives the uniform distribution") {
    MlpArchitecture arch{4, {5}, 2};
    auto m = init_model(arch, 1);
    for (auto& layer : m.layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0f);
        std::fill(layer.b.begin(), layer.b.end(), 0.0f);
    }
    const std::vector<float> x(2 * 4, 1.5f);
    const auto probs = forward(m, x, 2);
    REQUIRE(probs.size() == 4);
    for (float p : probs)
        CHECK(p == doctest::Approx(0.5f));
}

TEST_CASE("forward matches a hand-computed single-unit network") {
    // 1 input -> 1 hidden (ReLU) -> 2 outputs (softmax)
    MlpArchitecture arch{1, {1}, 2};
    auto m = init_model(arch, 1);
    m.layers[0].w = {2.0f};        // hidden = relu(2x + 1)
    m.layers[0].b = {1.0f};
    m.layers[1].w = {0.5f, -0.5f}; // logits = (0.5h, -0.5h + 0.25)
    m.layers[1].b = {0.0f, 0.25f};

    const std::vector<float> x{3.0f};
    const auto probs = forward(m, x, 1);
    const double h = 7.0;
    const double z0 = 0.5 * h, z1 = -0.5 * h + 0.25;
    const double e0 = std::exp(z0 - z0), e1 = std::exp(z1 - z0);
    const double want0 = e0 / (e0 + e1);
    CHECK(probs[0] == doctest::Approx(want0).epsilon(1e-6));
    CHECK(probs[1] == doctest::Approx(1.0 - want0).epsilon(1e-6));
}

TEST_CASE("softmax rows sum to one and shifting logits leaves probabilities unchanged") {
    MlpArchitecture arch{6, {8, 4}, 2};
    auto m = init_model(arch, 33);
    std::mt19937_64 rng(2);
    std::vector<float> x(5 * 6);
    for (auto& v : x)
        v = static_cast<float>(oracle::uniform(rng, -2, 2));
    const auto probs = forward(m, x, 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(probs[i * 2] + probs[i * 2 + 1] == doctest::Approx(1.0f).epsilon(1e-6));

    // shift both output biases by a constant: probabilities must not move
    auto shifted = m;
    for (auto& b : shifted.layers.back().b)
        b += 3.75f;
    const auto probs2 = forward(shifted, x, 5);
    for (std::size_t i = 0; i < probs.size(); ++i)
        CHECK(probs2[i] == doctest::Approx(probs[i]).epsilon(1e-5));
}

TEST_CASE("cross entropy") {
    SUBCASE("perfect one-hot predictions give ~0") {
        const std::vector<float> probs{1.0f, 0.0f, 0.0f, 1.0f};
        const std::vector<std::uint8_t> labels{1, 2};
        CHECK(cross_entropy(probs, labels) <= 1e-11);
    }
    SUBCASE("uniform predictions give ln 2") {
        const std::vector<float> probs{0.5f, 0.5f, 0.5f, 0.5f};
        const std::vector<std::uint8_t> labels{1, 2};
        CHECK(cross_entropy(probs, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    }
    SUBCASE("random batches match a per-sample loop oracle") {
        std::mt19937_64 rng(7);
        const std::size_t n = 64;
        std::vector<float> probs(n * 2);
        std::vector<std::uint8_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = oracle::uniform(rng, 0.01, 0.99);
            probs[i * 2] = static_cast<float>(p);
            probs[i * 2 + 1] = static_cast<float>(1.0 - p);
            labels[i] = 1 + rng() % 2;
        }
        double want = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            want += -std::log(static_cast<double>(probs[i * 2 + (labels[i] - 1)]));
        want /= static_cast<double>(n);
        CHECK(cross_entropy(probs, labels) == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("labels outside {1,2} are rejected") {
        const std::vector<float> probs{0.5f, 0.5f};
        const std::vector<std::uint8_t> labels{3};
        CHECK_THROWS_AS(cross_entropy(probs, labels), Error);
    }
}

TEST_CASE("backward gradients match central finite differences (double precision)") {
    std::mt19937_64 rng(11);
    const MlpArchitecture arch{4, {5, 3}, 2};
    const std::size_t batch = 8;

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto model = init_model_t<double>(arch, seed);
        // evaluate at a generic point: zero biases put ReLU pre-activations
        // exactly on the kink (dead units forward exact zeros), where the
        // subgradient and the finite difference legitimately disagree
        for (auto& layer : model.layers)
            for (auto& b : layer.b)
                b = oracle::uniform(rng, -0.2, 0.2);
        std::vector<double> x(batch * arch.input_size);
        std::vector<std::uint8_t> labels(batch);
        for (auto& v : x)
            v = oracle::uniform(rng, -1.5, 1.5);
        for (auto& l : labels)
            l = 1 + rng() % 2;

        BasicCache<double> cache;
        forward_t<double>(model, x.data(), batch, &cache);
        const auto grads = backward_t<double>(model, cache, labels);

        auto loss_at = [&](BasicModel<double>& m) {
            const auto probs = forward_t<double>(m, x.data(), batch, nullptr);
            return cross_entropy_t<double>(probs, labels, 2);
        };

        const double h = 1e-4;
        double max_rel = 0.0;
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            auto check_param = [&](std::vector<double>& params, const std::vector<double>& g) {
                for (std::size_t i = 0; i < params.size(); ++i) {
                    const double keep = params[i];
                    params[i] = keep + h;
                    const double up = loss_at(model);
                    params[i] = keep - h;
                    const double dn = loss_at(model);
                    params[i] = keep;
                    const double fd = (up - dn) / (2.0 * h);
                    const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-8});
                    max_rel = std::max(max_rel, std::abs(fd - g[i]) / denom);
                }
            };
            check_param(model.layers[l].w, grads.layers[l].dw);
            check_param(model.layers[l].b, grads.layers[l].db);
        }
        CHECK(max_rel <= 1e-4);
    }
}

TEST_CASE("zero-input batch with zero biases kills the first-layer weight gradients") {
    MlpArchitecture arch{3, {4}, 2};
    auto m = init_model(arch, 5);
    const std::vector<float> x(2 * 3, 0.0f);
    const std::vector<std::uint8_t> labels{1, 2};
    ForwardCache cache;
    forward(m, x, 2, &cache);
    const auto grads = backward(m, cache, labels);
    for (float g : grads.layers[0].dw)
        CHECK(g == 0.0f);
}

TEST_CASE("a duplicated sample gives the same gradient as the single sample") {
    MlpArchitecture arch{3, {4}, 2};
    auto m = init_model(arch, 6);
    const std::vector<float> x1{0.5f, -1.0f, 2.0f};
    std::vector<float> x2 = {0.5f, -1.0f, 2.0f, 0.5f, -1.0f, 2.0f};
    const std::vector<std::uint8_t> l1{2}, l2{2, 2};

    ForwardCache c1, c2;
    forward(m, x1, 1, &c1);
    forward(m, x2, 2, &c2);
    const auto g1 = backward(m, c1, l1);
    const auto g2 = backward(m, c2, l2);
    for (std::size_t l = 0; l < g1.layers.size(); ++l)
        for (std::size_t i = 0; i < g1.layers[l].dw.size(); ++i)
            CHECK(g2.layers[l].dw[i] == doctest::Approx(g1.layers[l].dw[i]).epsilon(1e-6));
}

TEST_CASE("adam_step") {
    TrainConfig cfg;
    cfg.learning_rate = 1e-4f;

    SUBCASE("zero gradients leave parameters unchanged") {
        MlpArchitecture arch{2, {2}, 2};
        auto m = init_model(arch, 3);
        const auto before = m.layers[0].w;
        Gradients g;
        g.layers.resize(2);
        for (std::size_t l = 0; l < 2; ++l) {
            g.layers[l].dw.assign(m.layers[l].w.size(), 0.0f);
            g.layers[l].db.assign(m.layers[l].b.size(), 0.0f);
        }
        adam_step(m, g, cfg);
        CHECK(m.layers[0].w == before);
        CHECK(m.step == 1);
    }
    SUBCASE("first bias-corrected step on a scalar parameter") {
        // no hidden layer: one 1x2 dense layer, gradient 1 on the first
        // weight; update = -lr / (1 + eps)
        auto m = init_model(MlpArchitecture{1, {}, 2}, 1);
        const float w0 = m.layers[0].w[0];
        Gradients g;
        g.layers.resize(1);
        g.layers[0].dw = {1.0f, 0.0f};
        g.layers[0].db = {0.0f, 0.0f};
        adam_step(m, g, cfg);
        const float delta = m.layers[0].w[0] - w0;
        CHECK(delta == doctest::Approx(-9.99999e-5f).epsilon(1e-4));
    }
    SUBCASE("descent on f(theta) = theta^2 from theta = 1") {
        // gradient is 2*theta; lr 0.005 so 100 steps make real progress
        TrainConfig c;
        c.learning_rate = 0.005f;
        auto m = init_model(MlpArchitecture{1, {}, 2}, 1);
        m.layers[0].w = {1.0f, 0.0f};
        m.layers[0].b = {0.0f, 0.0f};
        Gradients g;
        g.layers.resize(1);
        g.layers[0].db = {0.0f, 0.0f};
        float prev = 1.0f;
        bool monotone_after_warmup = true;
        for (int step = 0; step < 100; ++step) {
            g.layers[0].dw = {2.0f * m.layers[0].w[0], 0.0f};
            adam_step(m, g, c);
            const float cur = std::abs(m.layers[0].w[0]);
            if (step >= 5 && cur > prev)
                monotone_after_warmup = false;
            prev = cur;
        }
        CHECK(monotone_after_warmup);
        CHECK(std::abs(m.layers[0].w[0]) < 0.9f);
    }
}

TEST_CASE("training separates linearly separable blobs within 50 epochs") {
    const auto set = separable_blobs(2000, 66, 7);
    // the oracle certifies separability first
    CHECK(oracle::logistic_accuracy(set.features, set.feature_width, set.labels) >= 0.99);

    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 1e-3f; // small model, modest schedule
    cfg.batch_size = 256;
    cfg.seed = 3;
    auto model = init_model(MlpArchitecture{66, {32, 16}, 2}, 3);
    const auto history = train(model, set, cfg);
    REQUIRE(history.size() == 50);
    CHECK(history.back().accuracy >= 0.99);
}

TEST_CASE("training is deterministic per seed") {
    const auto set = separable_blobs(300, 12, 9);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 1e-3f;
    cfg.batch_size = 64;
    cfg.seed = 77;
    auto m1 = init_model(MlpArchitecture{12, {8}, 2}, 5);
    auto m2 = init_model(MlpArchitecture{12, {8}, 2}, 5);
    const auto h1 = train(m1, set, cfg);
    const auto h2 = train(m2, set, cfg);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t e = 0; e < h1.size(); ++e) {
        CHECK(h1[e].loss == h2[e].loss);
        CHECK(h1[e].accuracy == h2[e].accuracy);
    }
    CHECK(m1.layers[0].w == m2.layers[0].w);
}

TEST_CASE("train-set losses stay finite across epochs") {
    const auto set = separable_blobs(200, 8, 13, /*margin=*/50.0);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.learning_rate = 0.05f; // deliberately aggressive
    cfg.batch_size = 32;
    cfg.seed = 1;
    auto model = init_model(MlpArchitecture{8, {16}, 2}, 2);
    const auto history = train(model, set, cfg);
    for (const auto& e : history)
        CHECK(std::isfinite(e.loss));
}

TEST_CASE("evaluate") {
    SUBCASE("a constant-prediction model scores 0.5 on a balanced set") {
        const auto set = separable_blobs(100, 4, 3);
        auto m = init_model(MlpArchitecture{4, {2}, 2}, 1);
        for (auto& layer : m.layers) {
            std::fill(layer.w.begin(), layer.w.end(), 0.0f);
            std::fill(layer.b.begin(), layer.b.end(), 0.0f);
        }
        // bias the output so class 1 always wins
        m.layers.back().b[0] = 1.0f;
        const auto r = evaluate(m, set);
        CHECK(r.accuracy == doctest::Approx(0.5));
        CHECK(r.confusion[0][1] == 0);
        CHECK(r.confusion[1][1] == 0);
    }
    SUBCASE("a trained model reaching 1.0 has a diagonal confusion matrix") {
        const auto set = separable_blobs(400, 16, 5);
        TrainConfig cfg;
        cfg.epochs = 40;
        cfg.learning_rate = 1e-3f;
        cfg.batch_size = 64;
        cfg.seed = 2;
        auto model = init_model(MlpArchitecture{16, {16}, 2}, 4);
        train(model, set, cfg);
        const auto r = evaluate(model, set);
        if (r.accuracy == 1.0) {
            CHECK(r.confusion[0][1] == 0);
            CHECK(r.confusion[1][0] == 0);
        }
        // accuracy always equals the confusion-matrix identity
        const double recomputed =
            static_cast<double>(r.confusion[0][0] + r.confusion[1][1]) /
            static_cast<double>(r.total);
        CHECK(r.accuracy == doctest::Approx(recomputed));
    }
    SUBCASE("band-count mismatch is rejected naming both sizes") {
        const auto set = separable_blobs(10, 4, 3);
        auto m = init_model(MlpArchitecture{6, {2}, 2}, 1);
        CHECK_THROWS_WITH_AS(evaluate(m, set), doctest::Contains("6"), Error);
    }
}

TEST_CASE("checkpoint round-trip preserves the model bit-exactly") {
    const auto dir = fs::temp_directory_path() / "specfuse_mlp_ckpt";
    fs::create_directories(dir);
    const std::string base = (dir / "model").string();

    auto model = init_model(MlpArchitecture{12, {8, 4}, 2}, 21);
    model.step = 17;
    TrainConfig cfg;
    cfg.seed = 9;
    cfg.epochs = 3;
    save_checkpoint(model, cfg, base);

    TrainConfig cfg2;
    const auto loaded = load_checkpoint(base, &cfg2);
    CHECK(loaded.arch == model.arch);
    CHECK(loaded.step == model.step);
    CHECK(cfg2.seed == cfg.seed);
    CHECK(cfg2.epochs == cfg.epochs);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        CHECK(loaded.layers[l].w == model.layers[l].w);
        CHECK(loaded.layers[l].b == model.layers[l].b);
        CHECK(loaded.layers[l].mw == model.layers[l].mw);
    }
    fs::remove_all(dir);
}

TEST_CASE("history CSV carries epoch, loss and accuracy rows") {
    const auto dir = fs::temp_directory_path() / "specfuse_mlp_hist";
    fs::create_directories(dir);
    const std::string path = (dir / "h.csv").string();
    std::vector<EpochStats> history{{0.5, 0.75}, {0.25, 0.875}};
    write_history_csv(history, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,loss,accuracy");
    std::getline(in, line);
    CHECK(line == "1,0.5,0.75");
    std::getline(in, line);
    CHECK(line == "2,0.25,0.875");
    fs::remove_all(dir);
}

TEST_CASE("architecture presets match the documented layer widths") {
    const auto a66 = MlpArchitecture::preset_66();
    CHECK(a66.input_size == 66);
    CHECK(a66.hidden_sizes == std::vector<std::size_t>{128, 256, 512, 256});
    const auto a103 = MlpArchitecture::preset_103();
    CHECK(a103.input_size == 103);
    CHECK(a103.hidden_sizes == std::vector<std::size_t>{256, 512, 256, 128});
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.epochs = 1;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.batch_size = 1;
    cfg.learning_rate = 0.0f;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
