#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "adir/classify.hpp"
#include "adir/error.hpp"
#include "adir/rng.hpp"

using namespace adir;
namespace fs = std::filesystem;

namespace {

// Linearly separable two-class rows: class 0 lives high on slot 0,
// class 1 low, with a little seeded jitter elsewhere.
TrainingSet separable_rows(int per_class, uint64_t seed) {
    TrainingSet set;
    Rng rng(seed);
    for (int i = 0; i < 2 * per_class; ++i) {
        int cls = i % 2;
        std::array<double, kFeatureCount> f{};
        for (int j = 0; j < kFeatureCount; ++j)
            f[j] = 0.45 + 0.1 * rng.uniform();
        f[0] = cls == 0 ? 0.85 + 0.1 * rng.uniform() : 0.05 + 0.1 * rng.uniform();
        f[1] = cls == 0 ? 0.1 : 0.9;
        std::array<double, kKindCount> y{};
        y[cls] = 1.0;
        set.features.push_back(f);
        set.targets.push_back(y);
    }
    return set;
}

FeatureVector random_features(Rng& rng) {
    FeatureVector fv;
    for (auto& v : fv.values)
        v = rng.uniform();
    return fv;
}

} // namespace

TEST_CASE("sigmoid basics") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5));
    for (double z : {0.5, 3.0, 10.0})
        CHECK(sigmoid(-z) == doctest::Approx(1.0 - sigmoid(z)).epsilon(1e-12));
    CHECK(std::fabs(sigmoid(40.0) - 1.0) < 1e-12);
    CHECK(std::fabs(sigmoid(-40.0)) < 1e-12);
    // strictly inside (0,1) across the probed range
    for (double z = -500.0; z <= 500.0; z += 25.0) {
        double p = sigmoid(z);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("softmax basics") {
    std::vector<double> equal(7, 1.3);
    auto p = softmax(equal);
    for (double v : p)
        CHECK(v == doctest::Approx(1.0 / 7.0).epsilon(1e-12));

    Rng rng(5);
    std::vector<double> z(7);
    for (auto& v : z)
        v = rng.uniform(-4.0, 4.0);
    auto a = softmax(z);
    std::vector<double> shifted = z;
    for (auto& v : shifted)
        v += 17.25;
    auto b = softmax(shifted);
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(std::fabs(a[i] - b[i]) < 1e-12);

    // spike at z_1 = 10: expected value evaluated directly from the formula
    std::vector<double> spike = {10, 0, 0, 0, 0, 0, 0};
    const double expected = std::exp(10.0) / (std::exp(10.0) + 6.0); // 0.99972766...
    auto s = softmax(spike);
    CHECK(s[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(s[0] > 0.999);
}

TEST_CASE("softmax preserves the argmax of its input") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(7);
        for (auto& v : z)
            v = rng.uniform(-30.0, 30.0);
        auto p = softmax(z);
        size_t zi = std::max_element(z.begin(), z.end()) - z.begin();
        size_t pi = std::max_element(p.begin(), p.end()) - p.begin();
        CHECK(zi == pi);
    }
}

TEST_CASE("forward: zero residual block reduces to the plain two-layer net") {
    ResidualHead model(16, 42);
    auto params = model.params();
    for (size_t i = model.w_res_off(); i < model.w_out_off(); ++i)
        params[i] = 0.0;

    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        FeatureVector fv = random_features(rng);
        auto [lv, pv] = forward(model, fv, ActivationMode::Sigmoid);

        // independent two-layer evaluation
        const int H = model.hidden();
        std::vector<double> h(H);
        for (int j = 0; j < H; ++j) {
            double acc = params[model.b_in_off() + j];
            for (int i = 0; i < 16; ++i)
                acc += params[model.w_in_off() + j * 16 + i] * fv.values[i];
            h[j] = acc; // relu(0) + h_in = h_in
        }
        for (int o = 0; o < kKindCount; ++o) {
            double acc = params[model.b_out_off() + o];
            for (int j = 0; j < H; ++j)
                acc += params[model.w_out_off() + o * H + j] * h[j];
            CHECK(std::fabs(lv.z[o] - acc) < 1e-12);
        }
    }
}

TEST_CASE("forward: all-zero weights give 0.5 sigmoid probabilities") {
    ResidualHead model(8, 1);
    for (auto& p : model.params())
        p = 0.0;
    Rng rng(3);
    FeatureVector fv = random_features(rng);
    auto [lv, pv] = forward(model, fv, ActivationMode::Sigmoid);
    for (int o = 0; o < kKindCount; ++o) {
        CHECK(lv.z[o] == 0.0);
        CHECK(pv.p[o] == doctest::Approx(0.5));
    }
}

TEST_CASE("forward: softmax probabilities sum to one") {
    ResidualHead model(32, 11);
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        auto [lv, pv] = forward(model, random_features(rng), ActivationMode::Softmax);
        double sum = 0.0;
        for (double p : pv.p)
            sum += p;
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("sgd momentum single step matches the damped update") {
    OptimizerState s = OptimizerState::sgd_momentum(0.1, 0.9);
    std::vector<double> w = {1.0};
    std::vector<double> g = {1.0};
    sgd_momentum_step(s, w, g);
    // V1 = 0.9 * 0 + 0.1 * 1 = 0.1, delta = -0.1 * 0.1 = -0.01
    CHECK(s.velocity[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-15));

    sgd_momentum_step(s, w, g);
    // V2 = 0.9 * 0.1 + 0.1 * 1 = 0.19, cumulative delta = -0.029
    CHECK(s.velocity[0] == doctest::Approx(0.19).epsilon(1e-12));
    CHECK(w[0] == doctest::Approx(1.0 - 0.029).epsilon(1e-12));
}

TEST_CASE("beta zero reproduces plain sgd over 100 steps exactly") {
    OptimizerState s = OptimizerState::sgd_momentum(0.05, 0.0);
    std::vector<double> w = {0.7, -0.3};
    std::vector<double> w_plain = w;
    Rng rng(6);
    for (int step = 0; step < 100; ++step) {
        std::vector<double> g = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        sgd_momentum_step(s, w, g);
        for (size_t i = 0; i < w_plain.size(); ++i)
            w_plain[i] -= 0.05 * (0.0 * 0.0 + (1.0 - 0.0) * g[i]);
        CHECK(w[0] == w_plain[0]);
        CHECK(w[1] == w_plain[1]);
    }
}

TEST_CASE("optimizers reject mismatched shapes") {
    OptimizerState s = OptimizerState::sgd_momentum(0.1, 0.9);
    std::vector<double> w = {1.0, 2.0};
    std::vector<double> g = {1.0};
    CHECK_THROWS_AS(sgd_momentum_step(s, w, g), ShapeMismatch);
    OptimizerState a = OptimizerState::adam(0.1);
    CHECK_THROWS_AS(adam_step(a, w, g), ShapeMismatch);
}

TEST_CASE("adam: zero gradient leaves fresh parameters unchanged") {
    OptimizerState s = OptimizerState::adam(0.05);
    std::vector<double> w = {0.4, -1.2};
    std::vector<double> g = {0.0, 0.0};
    adam_step(s, w, g);
    CHECK(w[0] == 0.4);
    CHECK(w[1] == -1.2);
}

TEST_CASE("adam: first step moves by about -alpha * sign(g)") {
    for (double g0 : {0.3, -2.0, 11.0}) {
        OptimizerState s = OptimizerState::adam(0.01);
        std::vector<double> w = {0.0};
        std::vector<double> g = {g0};
        adam_step(s, w, g);
        double expected = -0.01 * (g0 > 0 ? 1.0 : -1.0);
        CHECK(std::fabs(w[0] - expected) <= 0.01 * 1e-3);
    }
}

TEST_CASE("adam converges on the quadratic bowl") {
    OptimizerState s = OptimizerState::adam(0.05);
    std::vector<double> w = {1.0, 1.0};
    for (int step = 0; step < 500; ++step) {
        std::vector<double> g = w; // gradient of 0.5 * ||w||^2
        adam_step(s, w, g);
    }
    CHECK(std::sqrt(w[0] * w[0] + w[1] * w[1]) < 1e-3);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(101);
    const double step = 1e-5;
    double worst = 0.0;
    for (int draw = 0; draw < 25; ++draw) {
        ResidualHead model(8, rng.next_u64());
        FeatureVector fv = random_features(rng);
        std::array<double, kKindCount> y{};
        y[rng.below(kKindCount)] = 1.0;
        ActivationMode mode = draw % 2 ? ActivationMode::Sigmoid : ActivationMode::Softmax;

        std::vector<double> analytic(model.param_count(), 0.0);
        sample_gradient(model, std::span<const double, kFeatureCount>(fv.values),
                        std::span<const double, kKindCount>(y), mode, analytic);

        auto params = model.params();
        for (size_t i = 0; i < params.size(); i += 7) { // probe a spread of params
            double saved = params[i];
            params[i] = saved + step;
            double up = sample_loss(model, std::span<const double, kFeatureCount>(fv.values),
                                    std::span<const double, kKindCount>(y), mode);
            params[i] = saved - step;
            double down = sample_loss(model, std::span<const double, kFeatureCount>(fv.values),
                                      std::span<const double, kKindCount>(y), mode);
            params[i] = saved;
            double fd = (up - down) / (2.0 * step);
            double denom = std::max({std::fabs(fd), std::fabs(analytic[i]), 1e-6});
            worst = std::max(worst, std::fabs(fd - analytic[i]) / denom);
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("training separates a linearly separable toy set") {
    TrainingSet train_rows = separable_rows(40, 1);
    TrainingSet val_rows = separable_rows(10, 2);
    Hyperparams hyper;
    hyper.epochs = 35;
    hyper.batch_size = 16;
    hyper.alpha = 0.01;
    hyper.seed = 5;
    auto [model, history] = train_set(train_rows, val_rows, hyper, ActivationMode::Sigmoid);
    CHECK(history.epochs.back().val_accuracy == doctest::Approx(1.0));

    // loss settles into a non-increasing trajectory after the warmup epochs
    for (size_t e = 3; e + 1 < history.epochs.size(); ++e)
        CHECK(history.epochs[e + 1].train_loss <= history.epochs[e].train_loss + 1e-6);
}

TEST_CASE("training is bit-deterministic in the seed") {
    TrainingSet rows = separable_rows(20, 3);
    TrainingSet val = separable_rows(5, 4);
    Hyperparams hyper;
    hyper.epochs = 5;
    hyper.seed = 77;
    auto [m1, h1] = train_set(rows, val, hyper, ActivationMode::Sigmoid);
    auto [m2, h2] = train_set(rows, val, hyper, ActivationMode::Sigmoid);
    auto p1 = m1.params(), p2 = m2.params();
    REQUIRE(p1.size() == p2.size());
    for (size_t i = 0; i < p1.size(); ++i)
        CHECK(p1[i] == p2[i]);
}

TEST_CASE("history csv has the fixed header") {
    TrainingHistory h;
    h.epochs.push_back({1, 0.5, 0.6, 0.7});
    std::string csv = h.to_csv();
    CHECK(csv.rfind("epoch,train_loss,val_loss,val_accuracy\n", 0) == 0);
}

TEST_CASE("lr sweep selects by accuracy with smallest-rate tie-break") {
    // corpus-level sweep needs images; build a tiny separable corpus instead
    // through the featurized path by driving train_set via lr_sweep's rules:
    // both rates fully separate the toy set, so the tie goes to the smaller.
    TrainingSet rows = separable_rows(40, 6);
    TrainingSet val = separable_rows(10, 7);
    Hyperparams hyper;
    hyper.epochs = 35;
    hyper.batch_size = 16;
    hyper.seed = 8;

    std::vector<SweepRow> report;
    double best = 0.0, best_acc = -1.0;
    for (double rate : {0.01, 0.03}) {
        Hyperparams h = hyper;
        h.alpha = rate;
        auto [model, history] = train_set(rows, val, h, ActivationMode::Sigmoid);
        report.push_back({rate, history.epochs.back().val_accuracy,
                          history.epochs.back().val_loss});
        if (history.epochs.back().val_accuracy > best_acc) {
            best_acc = history.epochs.back().val_accuracy;
            best = rate;
        }
    }
    CHECK(report[0].val_accuracy == doctest::Approx(1.0));
    CHECK(report[1].val_accuracy == doctest::Approx(1.0));
    CHECK(best == 0.01);
}

TEST_CASE("lr sweep rejects an empty rate set") {
    Corpus corpus;
    CHECK_THROWS_AS(lr_sweep(corpus, {}, Hyperparams{}, ActivationMode::Sigmoid),
                    EmptyRateSet);
}

TEST_CASE("lr sweep with a single rate returns that rate") {
    CorpusRecipe recipe;
    recipe.per_kind_counts[0] = 6;
    recipe.per_kind_counts[4] = 6;
    recipe.working_width = recipe.working_height = 32;
    Corpus corpus = build_corpus_synthetic(3, recipe, 15);
    Hyperparams hyper;
    hyper.epochs = 2;
    hyper.batch_size = 4;
    SweepReport report = lr_sweep(corpus, {0.005}, hyper, ActivationMode::Sigmoid);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.best == 0.005);
}

TEST_CASE("per-class binarized confusions at theta") {
    CorpusRecipe recipe;
    recipe.per_kind_counts[kind_index(DegradationKind::Denoising)] = 4;
    recipe.clean_count = 4;
    recipe.working_width = recipe.working_height = 32;
    recipe.severity_lo = 0.8f;
    recipe.severity_hi = 0.9f;
    Corpus corpus = build_corpus_synthetic(2, recipe, 44);

    // a hand-built model is unnecessary: counts must balance regardless
    ResidualHead model(8, 2);
    BinaryConfusions bc = binary_confusions(model, corpus, 0.85);
    for (DegradationKind k : all_kinds()) {
        long long total = bc.tn(k) + bc.fp(k) + bc.fn(k) + bc.tp(k);
        CHECK(total == static_cast<long long>(corpus.samples.size()));
        long long positives = bc.fn(k) + bc.tp(k);
        CHECK(positives == (k == DegradationKind::Denoising ? 4 : 0));
    }
}

TEST_CASE("model file round trip is bit exact") {
    ResidualHead model(32, 123);
    auto dir = fs::temp_directory_path() / "adir_model_tests";
    fs::create_directories(dir);
    auto path = dir / "model.adrm";
    save_model(model, path);
    ResidualHead back = load_model(path);
    REQUIRE(back.hidden() == model.hidden());
    auto a = model.params(), b = back.params();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == b[i]);
}

TEST_CASE("model file errors") {
    auto dir = fs::temp_directory_path() / "adir_model_tests";
    fs::create_directories(dir);

    auto bad_magic = dir / "bad_magic.adrm";
    {
        std::ofstream out(bad_magic, std::ios::binary);
        out << "XXXX";
        uint32_t vals[3] = {1, 32, 7};
        out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    }
    CHECK_THROWS_AS(load_model(bad_magic), BadMagic);

    auto truncated = dir / "truncated.adrm";
    {
        ResidualHead model(16, 1);
        save_model(model, truncated);
        auto size = fs::file_size(truncated);
        fs::resize_file(truncated, size / 2);
    }
    CHECK_THROWS_AS(load_model(truncated), TruncatedFile);

    auto bad_version = dir / "bad_version.adrm";
    {
        std::ofstream out(bad_version, std::ios::binary);
        out << "ADRM";
        uint32_t vals[3] = {99, 32, 7};
        out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    }
    CHECK_THROWS_AS(load_model(bad_version), VersionMismatch);
}

TEST_CASE("train rejects an empty corpus") {
    Corpus corpus;
    CHECK_THROWS_AS(train(corpus, Hyperparams{}, ActivationMode::Sigmoid), EmptyCorpus);
}
