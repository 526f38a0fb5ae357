#include "adir/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "adir/error.hpp"
#include "adir/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model file format assumes a little-endian host");

namespace adir {

namespace {
// keep probabilities strictly inside (0,1) so BCE stays finite
constexpr double kProbEps = 1e-15;
} // namespace

double sigmoid(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        double e = std::exp(z);
        p = e / (1.0 + e);
    }
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

std::vector<double> softmax(std::span<const double> z) {
    double zmax = -std::numeric_limits<double>::infinity();
    for (double v : z)
        zmax = std::max(zmax, v);
    std::vector<double> out(z.size());
    double sum = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - zmax);
        sum += out[i];
    }
    for (double& v : out)
        v /= sum;
    return out;
}

ResidualHead::ResidualHead(int hidden, uint64_t init_seed) : hidden_(hidden) {
    const size_t n = static_cast<size_t>(hidden) * inputs() + hidden +
                     static_cast<size_t>(hidden) * hidden + hidden +
                     static_cast<size_t>(outputs()) * hidden + outputs();
    params_.assign(n, 0.0);
    // uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)), biases zero
    auto init_layer = [&](size_t off, size_t count, int fan_in, int fan_out, int layer) {
        Rng rng(mix_seed(init_seed, static_cast<uint64_t>(layer)));
        double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (size_t i = 0; i < count; ++i)
            params_[off + i] = rng.uniform(-a, a);
    };
    init_layer(w_in_off(), static_cast<size_t>(hidden) * inputs(), inputs(), hidden, 0);
    init_layer(w_res_off(), static_cast<size_t>(hidden) * hidden, hidden, hidden, 1);
    init_layer(w_out_off(), static_cast<size_t>(outputs()) * hidden, hidden, outputs(), 2);
}

namespace {

struct ForwardCache {
    std::vector<double> h_in;  // W_in x + b_in
    std::vector<double> pre;   // W_res h_in + b_res
    std::vector<double> h;     // relu(pre) + h_in
    std::array<double, kKindCount> z{};
};

ForwardCache run_forward(const ResidualHead& model,
                         std::span<const double, kFeatureCount> x) {
    const int H = model.hidden();
    const auto p = model.params();
    ForwardCache c;
    c.h_in.resize(H);
    c.pre.resize(H);
    c.h.resize(H);
    for (int j = 0; j < H; ++j) {
        double acc = p[model.b_in_off() + j];
        const double* row = &p[model.w_in_off() + static_cast<size_t>(j) * ResidualHead::inputs()];
        for (int i = 0; i < ResidualHead::inputs(); ++i)
            acc += row[i] * x[i];
        c.h_in[j] = acc;
    }
    for (int j = 0; j < H; ++j) {
        double acc = p[model.b_res_off() + j];
        const double* row = &p[model.w_res_off() + static_cast<size_t>(j) * H];
        for (int k = 0; k < H; ++k)
            acc += row[k] * c.h_in[k];
        c.pre[j] = acc;
        c.h[j] = (acc > 0.0 ? acc : 0.0) + c.h_in[j];
    }
    for (int o = 0; o < ResidualHead::outputs(); ++o) {
        double acc = p[model.b_out_off() + o];
        const double* row = &p[model.w_out_off() + static_cast<size_t>(o) * H];
        for (int j = 0; j < H; ++j)
            acc += row[j] * c.h[j];
        c.z[o] = acc;
    }
    return c;
}

} // namespace

LogitVector ResidualHead::logits(std::span<const double, kFeatureCount> features) const {
    LogitVector lv;
    lv.z = run_forward(*this, features).z;
    return lv;
}

std::pair<LogitVector, ProbabilityVector>
forward(const ResidualHead& model, const FeatureVector& features, ActivationMode mode) {
    LogitVector lv = model.logits(std::span<const double, kFeatureCount>(features.values));
    ProbabilityVector pv;
    pv.mode = mode;
    if (mode == ActivationMode::Sigmoid) {
        for (int i = 0; i < kKindCount; ++i)
            pv.p[i] = sigmoid(lv.z[i]);
    } else {
        auto sm = softmax(std::span<const double>(lv.z.data(), lv.z.size()));
        std::copy(sm.begin(), sm.end(), pv.p.begin());
    }
    return {lv, pv};
}

// ---- optimizers ------------------------------------------------------------

OptimizerState OptimizerState::sgd_momentum(double alpha, double beta) {
    OptimizerState s;
    s.kind = OptimizerKind::SgdMomentum;
    s.alpha = alpha;
    s.beta = beta;
    return s;
}

OptimizerState OptimizerState::adam(double alpha) {
    OptimizerState s;
    s.kind = OptimizerKind::Adam;
    s.alpha = alpha;
    return s;
}

void sgd_momentum_step(OptimizerState& state, std::span<double> params,
                       std::span<const double> grads) {
    if (params.size() != grads.size())
        throw ShapeMismatch("params/grads size differ");
    if (state.velocity.empty())
        state.velocity.assign(params.size(), 0.0);
    if (state.velocity.size() != params.size())
        throw ShapeMismatch("velocity buffer does not match parameters");
    for (size_t i = 0; i < params.size(); ++i) {
        state.velocity[i] = state.beta * state.velocity[i] + (1.0 - state.beta) * grads[i];
        params[i] -= state.alpha * state.velocity[i];
    }
    ++state.t;
}

void adam_step(OptimizerState& state, std::span<double> params,
               std::span<const double> grads) {
    if (params.size() != grads.size())
        throw ShapeMismatch("params/grads size differ");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size())
        throw ShapeMismatch("moment buffers do not match parameters");
    ++state.t;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        double m_hat = state.m[i] / bc1;
        double v_hat = state.v[i] / bc2;
        params[i] -= state.alpha * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

void optimizer_step(OptimizerState& state, std::span<double> params,
                    std::span<const double> grads) {
    if (state.kind == OptimizerKind::SgdMomentum)
        sgd_momentum_step(state, params, grads);
    else
        adam_step(state, params, grads);
}

// ---- loss and gradient -----------------------------------------------------

double sample_loss(const ResidualHead& model, std::span<const double, kFeatureCount> x,
                   std::span<const double, kKindCount> y, ActivationMode mode) {
    ForwardCache c = run_forward(model, x);
    if (mode == ActivationMode::Sigmoid) {
        double loss = 0.0;
        for (int o = 0; o < kKindCount; ++o) {
            double p = sigmoid(c.z[o]);
            loss -= y[o] * std::log(p) + (1.0 - y[o]) * std::log(1.0 - p);
        }
        return loss / kKindCount;
    }
    auto sm = softmax(std::span<const double>(c.z.data(), c.z.size()));
    double loss = 0.0;
    for (int o = 0; o < kKindCount; ++o)
        if (y[o] > 0.0)
            loss -= y[o] * std::log(std::max(sm[o], kProbEps));
    return loss;
}

void sample_gradient(const ResidualHead& model, std::span<const double, kFeatureCount> x,
                     std::span<const double, kKindCount> y, ActivationMode mode,
                     std::span<double> grad_out) {
    if (grad_out.size() != model.param_count())
        throw ShapeMismatch("gradient buffer does not match parameters");
    const int H = model.hidden();
    const auto p = model.params();
    ForwardCache c = run_forward(model, x);

    // dL/dz: both losses reduce to (p - y), scaled by 1/K for the class mean
    std::array<double, kKindCount> dz{};
    if (mode == ActivationMode::Sigmoid) {
        for (int o = 0; o < kKindCount; ++o)
            dz[o] = (sigmoid(c.z[o]) - y[o]) / kKindCount;
    } else {
        auto sm = softmax(std::span<const double>(c.z.data(), c.z.size()));
        for (int o = 0; o < kKindCount; ++o)
            dz[o] = sm[o] - y[o];
    }

    std::vector<double> dh(H, 0.0), dh_in(H, 0.0);
    for (int o = 0; o < kKindCount; ++o) {
        grad_out[model.b_out_off() + o] += dz[o];
        double* wrow = &grad_out[model.w_out_off() + static_cast<size_t>(o) * H];
        const double* row = &p[model.w_out_off() + static_cast<size_t>(o) * H];
        for (int j = 0; j < H; ++j) {
            wrow[j] += dz[o] * c.h[j];
            dh[j] += dz[o] * row[j];
        }
    }
    // h = relu(pre) + h_in: the skip path feeds dh straight into dh_in,
    // the residual path adds W_res^T dpre on top
    for (int j = 0; j < H; ++j)
        dh_in[j] = dh[j];
    for (int j = 0; j < H; ++j) {
        double dpre = c.pre[j] > 0.0 ? dh[j] : 0.0;
        if (dpre != 0.0) {
            grad_out[model.b_res_off() + j] += dpre;
            double* wrow = &grad_out[model.w_res_off() + static_cast<size_t>(j) * H];
            const double* row = &p[model.w_res_off() + static_cast<size_t>(j) * H];
            for (int k = 0; k < H; ++k) {
                wrow[k] += dpre * c.h_in[k];
                dh_in[k] += dpre * row[k];
            }
        }
    }
    for (int j = 0; j < H; ++j) {
        grad_out[model.b_in_off() + j] += dh_in[j];
        double* wrow = &grad_out[model.w_in_off() + static_cast<size_t>(j) * ResidualHead::inputs()];
        for (int i = 0; i < ResidualHead::inputs(); ++i)
            wrow[i] += dh_in[j] * x[i];
    }
}

// ---- training --------------------------------------------------------------

TrainingSet featurize(const Corpus& corpus) {
    TrainingSet set;
    set.features.reserve(corpus.samples.size());
    set.targets.reserve(corpus.samples.size());
    for (const auto& sample : corpus.samples) {
        set.features.push_back(extract_features(sample.image).values);
        std::array<double, kKindCount> y{};
        for (DegradationKind k : sample.labels)
            y[kind_index(k)] = 1.0;
        set.targets.push_back(y);
    }
    return set;
}

namespace {

double eval_loss(const ResidualHead& model, const TrainingSet& set, ActivationMode mode) {
    if (set.features.empty())
        return 0.0;
    double loss = 0.0;
    for (size_t i = 0; i < set.features.size(); ++i)
        loss += sample_loss(model, std::span<const double, kFeatureCount>(set.features[i]),
                            std::span<const double, kKindCount>(set.targets[i]), mode);
    return loss / static_cast<double>(set.features.size());
}

// argmax-hit accuracy: the top class must be one of the sample's labels;
// clean samples count as correct when every probability stays below 0.5
double eval_accuracy(const ResidualHead& model, const TrainingSet& set,
                     ActivationMode mode) {
    if (set.features.empty())
        return 0.0;
    size_t hits = 0;
    for (size_t i = 0; i < set.features.size(); ++i) {
        FeatureVector fv;
        fv.values = set.features[i];
        auto [lv, pv] = forward(model, fv, mode);
        int best = 0;
        for (int o = 1; o < kKindCount; ++o)
            if (pv.p[o] > pv.p[best])
                best = o;
        bool clean = std::accumulate(set.targets[i].begin(), set.targets[i].end(), 0.0) == 0.0;
        if (clean) {
            if (mode == ActivationMode::Sigmoid && pv.p[best] < 0.5)
                ++hits;
        } else if (set.targets[i][best] > 0.0) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(set.features.size());
}

} // namespace

std::pair<ResidualHead, TrainingHistory> train_set(const TrainingSet& train_rows,
                                                   const TrainingSet& val_rows,
                                                   const Hyperparams& hyper,
                                                   ActivationMode mode) {
    if (train_rows.features.empty())
        throw EmptyCorpus("no training samples");

    ResidualHead model(hyper.hidden, mix_seed(hyper.seed, 0xd0d0ULL));
    OptimizerState opt = hyper.optimizer == OptimizerKind::Adam
                             ? OptimizerState::adam(hyper.alpha)
                             : OptimizerState::sgd_momentum(hyper.alpha, hyper.beta);

    const size_t n = train_rows.features.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grads(model.param_count());

    TrainingHistory history;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(hyper.seed, 1000 + static_cast<uint64_t>(epoch)));
        for (size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        for (size_t start = 0; start < n; start += hyper.batch_size) {
            size_t end = std::min(n, start + hyper.batch_size);
            std::fill(grads.begin(), grads.end(), 0.0);
            double batch_loss = 0.0;
            for (size_t i = start; i < end; ++i) {
                size_t idx = order[i];
                batch_loss += sample_loss(
                    model, std::span<const double, kFeatureCount>(train_rows.features[idx]),
                    std::span<const double, kKindCount>(train_rows.targets[idx]), mode);
                sample_gradient(
                    model, std::span<const double, kFeatureCount>(train_rows.features[idx]),
                    std::span<const double, kKindCount>(train_rows.targets[idx]), mode, grads);
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (double& g : grads)
                g *= inv;
            optimizer_step(opt, model.params(), grads);
            epoch_loss += batch_loss;
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.train_loss = epoch_loss / static_cast<double>(n);
        stats.val_loss = eval_loss(model, val_rows, mode);
        stats.val_accuracy = eval_accuracy(model, val_rows, mode);
        history.epochs.push_back(stats);
    }
    return {std::move(model), std::move(history)};
}

std::pair<ResidualHead, TrainingHistory> train(const Corpus& corpus,
                                               const Hyperparams& hyper,
                                               ActivationMode mode) {
    if (corpus.samples.empty())
        throw EmptyCorpus("empty corpus");
    // 20% validation holdout, stratified like everything else
    auto [train_part, val_part] = stratified_split(corpus, 0.2, mix_seed(hyper.seed, 0x5a1ULL));
    return train_set(featurize(train_part), featurize(val_part), hyper, mode);
}

std::string TrainingHistory::to_csv() const {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss,val_accuracy\n";
    for (const auto& e : epochs)
        out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ','
            << e.val_accuracy << '\n';
    return out.str();
}

namespace {

SweepReport sweep_impl(const Corpus& corpus, const std::vector<double>& values,
                       const Hyperparams& hyper, ActivationMode mode, bool sweep_lr) {
    if (values.empty())
        throw EmptyRateSet("sweep needs at least one value");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    auto [train_part, val_part] = stratified_split(corpus, 0.2, mix_seed(hyper.seed, 0x5a1ULL));
    TrainingSet train_rows = featurize(train_part);
    TrainingSet val_rows = featurize(val_part);

    SweepReport report;
    double best_acc = -1.0;
    for (double value : sorted) {
        Hyperparams h = hyper;
        if (sweep_lr)
            h.alpha = value;
        else
            h.beta = value;
        auto [model, history] = train_set(train_rows, val_rows, h, mode);
        SweepRow row;
        row.value = value;
        row.val_accuracy = history.epochs.back().val_accuracy;
        row.val_loss = history.epochs.back().val_loss;
        report.rows.push_back(row);
        if (row.val_accuracy > best_acc) { // strict: ties keep the smaller value
            best_acc = row.val_accuracy;
            report.best = value;
        }
    }
    return report;
}

} // namespace

SweepReport lr_sweep(const Corpus& corpus, const std::vector<double>& rates,
                     const Hyperparams& hyper, ActivationMode mode) {
    return sweep_impl(corpus, rates, hyper, mode, true);
}

SweepReport momentum_sweep(const Corpus& corpus, const std::vector<double>& momenta,
                           const Hyperparams& hyper, ActivationMode mode) {
    Hyperparams h = hyper;
    h.optimizer = OptimizerKind::SgdMomentum;
    return sweep_impl(corpus, momenta, h, mode, false);
}

ProbabilityVector predict(const ResidualHead& model, const Image& image,
                          ActivationMode mode) {
    return forward(model, extract_features(image), mode).second;
}

double argmax_accuracy(const ResidualHead& model, const Corpus& corpus) {
    TrainingSet set = featurize(corpus);
    return eval_accuracy(model, set, ActivationMode::Sigmoid);
}

BinaryConfusions binary_confusions(const ResidualHead& model, const Corpus& corpus,
                                   double theta) {
    BinaryConfusions out;
    for (const auto& sample : corpus.samples) {
        ProbabilityVector pv = predict(model, sample.image, ActivationMode::Sigmoid);
        for (DegradationKind k : all_kinds()) {
            bool truth = sample.labels.count(k) > 0;
            bool flagged = pv.p[kind_index(k)] >= theta;
            ++out.counts[kind_index(k)][(truth ? 2 : 0) + (flagged ? 1 : 0)];
        }
    }
    return out;
}

// ---- model file ------------------------------------------------------------

void save_model(const ResidualHead& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoFailure("cannot write " + path.string());
    const char magic[4] = {'A', 'D', 'R', 'M'};
    const uint32_t version = 1;
    const uint32_t hidden = static_cast<uint32_t>(model.hidden());
    const uint32_t outputs = static_cast<uint32_t>(ResidualHead::outputs());
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&hidden), 4);
    out.write(reinterpret_cast<const char*>(&outputs), 4);
    auto params = model.params();
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!out)
        throw IoFailure("write failed: " + path.string());
}

ResidualHead load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MissingFile("cannot open " + path.string());
    char magic[4];
    uint32_t version = 0, hidden = 0, outputs = 0;
    if (!in.read(magic, 4))
        throw TruncatedFile("short header: " + path.string());
    if (std::memcmp(magic, "ADRM", 4) != 0)
        throw BadMagic("not a model file: " + path.string());
    if (!in.read(reinterpret_cast<char*>(&version), 4) ||
        !in.read(reinterpret_cast<char*>(&hidden), 4) ||
        !in.read(reinterpret_cast<char*>(&outputs), 4))
        throw TruncatedFile("short header: " + path.string());
    if (version != 1)
        throw VersionMismatch("unsupported model version");
    if (outputs != static_cast<uint32_t>(ResidualHead::outputs()) || hidden < 1 ||
        hidden > 65536)
        throw CorruptData("implausible model dimensions");

    ResidualHead model(static_cast<int>(hidden), 0);
    auto params = model.params();
    if (!in.read(reinterpret_cast<char*>(params.data()),
                 static_cast<std::streamsize>(params.size() * sizeof(double))))
        throw TruncatedFile("model parameters truncated: " + path.string());
    return model;
}

} // namespace adir
