#pragma once

#include "crisis/featurizer.hpp"
#include "crisis/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

namespace crisis {

struct LabelDistribution {
    std::vector<double> probs;

    static LabelDistribution one_hot(std::size_t label, std::size_t class_count);
    static LabelDistribution uniform(std::size_t class_count);

    std::size_t size() const noexcept { return probs.size(); }
    std::size_t argmax() const;  // lowest index wins ties
    // Throws unless entries are >= 0 and sum to 1 within tol.
    void validate(double tol = 1e-6) const;
    bool operator==(const LabelDistribution&) const = default;
};

/// Weights of the compact classifier. With hidden_dim == 0 the model is a
/// multinomial logistic regression; otherwise one tanh hidden layer feeds the
/// softmax layer. Dropout acts on the input of the output layer: hidden
/// activations, or the input features for the linear model.
struct ClassifierParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t class_count = 0;
    double dropout_rate = 0.0;

    std::vector<double> w_in;   // input_dim x first_width(), row per input feature
    std::vector<double> b_in;   // first_width()
    std::vector<double> w_out;  // hidden_dim x class_count; empty for linear
    std::vector<double> b_out;  // class_count; empty for linear

    std::size_t first_width() const noexcept { return hidden_dim ? hidden_dim : class_count; }
    bool is_linear() const noexcept { return hidden_dim == 0; }
    std::size_t parameter_count() const noexcept { return w_in.size() + b_in.size() + w_out.size() + b_out.size(); }
    void validate() const;  // shapes consistent, values finite

    bool operator==(const ClassifierParams&) const = default;
};

struct ModelConfig {
    std::size_t hidden_dim = 64;
    double dropout_rate = 0.1;
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
ClassifierParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t class_count,
                             std::uint64_t seed, double dropout_rate = 0.0);

std::vector<double> softmax(std::span<const double> logits);

struct ForwardResult {
    std::vector<double> logits;
    LabelDistribution probs;
};

// Deterministic pass (dropout off). Throws on dim mismatch or non-finite input.
ForwardResult forward(const ClassifierParams& params, const FeatureVector& x);

// Stochastic pass with a fresh dropout mask drawn from rng.
ForwardResult forward_dropout(const ClassifierParams& params, const FeatureVector& x, Rng& rng);

std::size_t predict(const ClassifierParams& params, const FeatureVector& x);

struct TrainingExample {
    FeatureVector x;
    LabelDistribution y;
    double weight = 1.0;
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t epochs = 10;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;

    void validate() const;
};

/// Gradient of the batch objective. Input-layer rows are stored sparsely in
/// first-touch order; the remaining blocks are dense.
struct Gradient {
    std::size_t width = 0;
    std::vector<std::uint32_t> rows;
    std::vector<double> w_in_rows;  // rows.size() x width
    std::vector<double> b_in;
    std::vector<double> w_out;
    std::vector<double> b_out;

    void reset(const ClassifierParams& params);
    double* row(std::uint32_t input_index);  // inserts a zero row on first touch

    // Same layout as ClassifierParams, for checks.
    ClassifierParams to_dense(const ClassifierParams& shape) const;

private:
    std::unordered_map<std::uint32_t, std::size_t> slot_;
};

/// Weighted soft-label cross-entropy sum_i w_i CE(p_i, y_i) / sum_i w_i and its
/// gradient. Dropout is applied only when dropout_rng is non-null.
/// Returns 0 with a zero gradient when the total weight is zero.
double loss_and_gradient(const ClassifierParams& params, std::span<const TrainingExample> batch,
                         Gradient& grad, Rng* dropout_rng = nullptr);

double objective(const ClassifierParams& params, std::span<const TrainingExample> batch);

/// Minibatch trainer holding optimizer state between epochs. Adam updates are
/// lazy on the input layer: only rows touched by the batch are stepped (and
/// decayed), which keeps a step proportional to batch sparsity.
class Trainer {
public:
    Trainer(ClassifierParams params, TrainConfig config);

    // One seeded-shuffled pass. Returns the weighted mean loss over the epoch.
    double run_epoch(std::span<const TrainingExample> examples);

    // One update on the given batch. Returns the batch loss.
    double step(std::span<const TrainingExample> batch);
    double step_pointers(std::span<const TrainingExample* const> batch);

    const ClassifierParams& params() const noexcept { return params_; }
    ClassifierParams release() && { return std::move(params_); }
    std::size_t epochs_run() const noexcept { return epochs_run_; }

private:
    void apply(const Gradient& g);

    ClassifierParams params_;
    TrainConfig config_;
    Rng shuffle_rng_;
    Rng dropout_rng_;
    Gradient grad_;
    std::vector<std::size_t> order_;
    std::size_t epochs_run_ = 0;
    std::uint64_t t_ = 0;
    // Adam moments, laid out like params (w_in, b_in, w_out, b_out concatenated).
    std::vector<double> m_;
    std::vector<double> v_;
};

struct TrainResult {
    ClassifierParams params;
    std::vector<double> loss_history;
};

TrainResult train(ClassifierParams params, std::span<const TrainingExample> examples, const TrainConfig& config);

struct McDropoutResult {
    LabelDistribution mean;
    std::vector<double> variance;  // per class, unbiased sample variance
};

// shared_mask reuses a single dropout mask for every sample (variance is then 0).
McDropoutResult mc_dropout_predict(const ClassifierParams& params, const FeatureVector& x, std::size_t samples,
                                   std::uint64_t seed, bool shared_mask = false);

// logits[assigned] - max over the other classes.
double margin(std::span<const double> logits, std::size_t assigned);

// Binary format, little-endian:
//   8 bytes  magic "CSSLPRM1"
//   u32      format version (1)
//   u64 x3   input_dim, hidden_dim, class_count
//   f64      dropout_rate
//   f64[]    w_in, b_in, w_out, b_out (sizes implied by the dims)
void save_params(std::ostream& out, const ClassifierParams& params);
ClassifierParams load_params(std::istream& in);
void save_params(const std::filesystem::path& path, const ClassifierParams& params);
ClassifierParams load_params(const std::filesystem::path& path);

}  // namespace crisis
