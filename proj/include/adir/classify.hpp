#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adir/features.hpp"
#include "adir/kinds.hpp"
#include "adir/synth.hpp"

namespace adir {

enum class ActivationMode { Sigmoid, Softmax };
enum class OptimizerKind { SgdMomentum, Adam };

// numerically stable logistic; output kept strictly inside (0,1)
double sigmoid(double z);

// max-subtracted softmax
std::vector<double> softmax(std::span<const double> z);

struct LogitVector {
    std::array<double, kKindCount> z{};
};

struct ProbabilityVector {
    std::array<double, kKindCount> p{};
    ActivationMode mode = ActivationMode::Sigmoid;
};

// Two dense layers around one residual transformation: the hidden state is
// h = relu(W_res h_in + b_res) + h_in, so the inner block only has to learn
// the residual of the identity map.
class ResidualHead {
public:
    ResidualHead() = default;
    ResidualHead(int hidden, uint64_t init_seed);

    int hidden() const { return hidden_; }
    static constexpr int inputs() { return kFeatureCount; }
    static constexpr int outputs() { return kKindCount; }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    size_t param_count() const { return params_.size(); }

    LogitVector logits(std::span<const double, kFeatureCount> features) const;

    // offsets into the flat parameter vector
    size_t w_in_off() const { return 0; }
    size_t b_in_off() const { return static_cast<size_t>(hidden_) * inputs(); }
    size_t w_res_off() const { return b_in_off() + hidden_; }
    size_t b_res_off() const { return w_res_off() + static_cast<size_t>(hidden_) * hidden_; }
    size_t w_out_off() const { return b_res_off() + hidden_; }
    size_t b_out_off() const { return w_out_off() + static_cast<size_t>(outputs()) * hidden_; }

private:
    int hidden_ = 0;
    std::vector<double> params_;
};

std::pair<LogitVector, ProbabilityVector>
forward(const ResidualHead& model, const FeatureVector& features, ActivationMode mode);

// ---- optimizers ------------------------------------------------------------

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Adam;
    double alpha = 0.001;
    double beta = 0.9; // sgd momentum
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long long t = 0;
    std::vector<double> velocity; // sgd
    std::vector<double> m, v;     // adam moments

    static OptimizerState sgd_momentum(double alpha, double beta);
    static OptimizerState adam(double alpha);
};

// damped-momentum update: V <- beta V + (1 - beta) g; W <- W - alpha V
void sgd_momentum_step(OptimizerState& state, std::span<double> params,
                       std::span<const double> grads);

// standard Adam with bias correction
void adam_step(OptimizerState& state, std::span<double> params,
               std::span<const double> grads);

void optimizer_step(OptimizerState& state, std::span<double> params,
                    std::span<const double> grads);

// ---- training --------------------------------------------------------------

struct Hyperparams {
    int epochs = 35;
    int batch_size = 64;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double alpha = 0.001;
    double beta = 0.9;
    int hidden = 32;
    uint64_t seed = 1;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainingHistory {
    std::vector<EpochStats> epochs;
    std::string to_csv() const; // header: epoch,train_loss,val_loss,val_accuracy
};

// Dataset rows the trainer consumes: normalized features plus per-class targets.
struct TrainingSet {
    std::vector<std::array<double, kFeatureCount>> features;
    std::vector<std::array<double, kKindCount>> targets;
};

TrainingSet featurize(const Corpus& corpus);

// Mean per-class binary cross-entropy (sigmoid) or categorical cross-entropy
// (softmax) of one sample, plus the exact gradient of that loss.
double sample_loss(const ResidualHead& model, std::span<const double, kFeatureCount> x,
                   std::span<const double, kKindCount> y, ActivationMode mode);
void sample_gradient(const ResidualHead& model, std::span<const double, kFeatureCount> x,
                     std::span<const double, kKindCount> y, ActivationMode mode,
                     std::span<double> grad_out);

std::pair<ResidualHead, TrainingHistory> train(const Corpus& corpus,
                                               const Hyperparams& hyper,
                                               ActivationMode mode);

// Same trainer, but on a pre-featurized dataset (no validation holdout skew
// from re-splitting): used internally and by the sweeps.
std::pair<ResidualHead, TrainingHistory> train_set(const TrainingSet& train_rows,
                                                   const TrainingSet& val_rows,
                                                   const Hyperparams& hyper,
                                                   ActivationMode mode);

struct SweepRow {
    double value = 0.0; // learning rate or momentum
    double val_accuracy = 0.0;
    double val_loss = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double best = 0.0;
};

// Trains once per learning rate with the same seed and picks the highest
// final validation accuracy; ties go to the smaller rate.
SweepReport lr_sweep(const Corpus& corpus, const std::vector<double>& rates,
                     const Hyperparams& hyper, ActivationMode mode);

// Same selection rule over sgd momentum values.
SweepReport momentum_sweep(const Corpus& corpus, const std::vector<double>& momenta,
                           const Hyperparams& hyper, ActivationMode mode);

// prediction helpers
ProbabilityVector predict(const ResidualHead& model, const Image& image,
                          ActivationMode mode);
double argmax_accuracy(const ResidualHead& model, const Corpus& corpus);

// Multi-label evaluation: one 2x2 confusion per kind, thresholded at theta
// (row 0 = kind absent, row 1 = kind present; column 1 = p >= theta).
struct BinaryConfusions {
    std::array<std::array<long long, 4>, kKindCount> counts{}; // tn, fp, fn, tp

    long long tn(DegradationKind k) const { return counts[kind_index(k)][0]; }
    long long fp(DegradationKind k) const { return counts[kind_index(k)][1]; }
    long long fn(DegradationKind k) const { return counts[kind_index(k)][2]; }
    long long tp(DegradationKind k) const { return counts[kind_index(k)][3]; }
};

BinaryConfusions binary_confusions(const ResidualHead& model, const Corpus& corpus,
                                   double theta);

// ---- model file ------------------------------------------------------------

// magic "ADRM", u32 version, u32 hidden, u32 outputs, f64 parameters (LE)
void save_model(const ResidualHead& model, const std::filesystem::path& path);
ResidualHead load_model(const std::filesystem::path& path);

} // namespace adir
