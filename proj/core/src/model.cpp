#include "crisis/model.hpp"

#include "crisis/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace crisis {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct Activations {
    std::vector<double> h;     // tanh outputs (hidden model only)
    std::vector<double> keep;  // per dropout unit: 0 or 1/(1-p); empty when dropout is off
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> log_probs;
};

void check_input(const ClassifierParams& params, const FeatureVector& x) {
    if (x.dim != params.input_dim) {
        std::ostringstream msg;
        msg << "feature dim " << x.dim << " does not match model input dim " << params.input_dim;
        throw Error(msg.str());
    }
    for (const auto& [i, w] : x.entries) {
        if (i >= params.input_dim) throw Error("feature index out of range");
        if (!std::isfinite(w)) throw NumericError("non-finite feature value at index " + std::to_string(i));
    }
}

void draw_keep(std::vector<double>& keep, std::size_t units, double rate, Rng& rng) {
    keep.resize(units);
    const double scale = 1.0 / (1.0 - rate);
    for (auto& k : keep) k = rng.bernoulli(rate) ? 0.0 : scale;
}

void softmax_into(const std::vector<double>& logits, std::vector<double>& probs, std::vector<double>& log_probs) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    const double log_z = mx + std::log(z);
    probs.resize(logits.size());
    log_probs.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        log_probs[c] = logits[c] - log_z;
        probs[c] = std::exp(log_probs[c]);
    }
}

// mask_mode: 0 = no dropout, 1 = draw from rng, 2 = use act.keep as given.
void run_forward(const ClassifierParams& p, const FeatureVector& x, int mask_mode, Rng* rng, Activations& act) {
    const std::size_t width = p.first_width();
    const bool drop = mask_mode != 0 && p.dropout_rate > 0.0;
    if (mask_mode == 1 && drop) {
        draw_keep(act.keep, p.is_linear() ? x.entries.size() : p.hidden_dim, p.dropout_rate, *rng);
    } else if (!drop) {
        act.keep.clear();
    }

    std::vector<double>& first = p.is_linear() ? act.logits : act.h;
    first.assign(p.b_in.begin(), p.b_in.end());
    for (std::size_t e = 0; e < x.entries.size(); ++e) {
        const auto [i, xv] = x.entries[e];
        double v = xv;
        if (drop && p.is_linear()) v *= act.keep[e];
        if (v == 0.0) continue;
        const double* row = &p.w_in[static_cast<std::size_t>(i) * width];
        for (std::size_t j = 0; j < width; ++j) first[j] += v * row[j];
    }

    if (!p.is_linear()) {
        for (auto& v : act.h) v = std::tanh(v);
        act.logits.assign(p.b_out.begin(), p.b_out.end());
        for (std::size_t j = 0; j < p.hidden_dim; ++j) {
            double hv = act.h[j];
            if (drop) hv *= act.keep[j];
            if (hv == 0.0) continue;
            const double* row = &p.w_out[j * p.class_count];
            for (std::size_t c = 0; c < p.class_count; ++c) act.logits[c] += hv * row[c];
        }
    }
    softmax_into(act.logits, act.probs, act.log_probs);
}

ForwardResult to_result(Activations& act) {
    ForwardResult r;
    r.logits = std::move(act.logits);
    r.probs.probs = std::move(act.probs);
    return r;
}

template <class T>
void write_pod(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "params IO assumes a little-endian host");
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("truncated params file");
    return value;
}

constexpr std::array<char, 8> kParamsMagic{'C', 'S', 'S', 'L', 'P', 'R', 'M', '1'};
constexpr std::uint32_t kParamsVersion = 1;

}  // namespace

LabelDistribution LabelDistribution::one_hot(std::size_t label, std::size_t class_count) {
    if (label >= class_count) throw Error("one_hot label out of range");
    LabelDistribution d;
    d.probs.assign(class_count, 0.0);
    d.probs[label] = 1.0;
    return d;
}

LabelDistribution LabelDistribution::uniform(std::size_t class_count) {
    LabelDistribution d;
    d.probs.assign(class_count, 1.0 / static_cast<double>(class_count));
    return d;
}

std::size_t LabelDistribution::argmax() const {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

void LabelDistribution::validate(double tol) const {
    if (probs.empty()) throw Error("empty label distribution");
    double s = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error("label distribution has a negative or non-finite entry");
        s += p;
    }
    if (std::abs(s - 1.0) > tol) throw Error("label distribution does not sum to 1");
}

void ClassifierParams::validate() const {
    if (input_dim < 1 || class_count < 2) throw Error("classifier needs input_dim >= 1 and class_count >= 2");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout_rate must be in [0, 1)");
    const std::size_t width = first_width();
    if (w_in.size() != input_dim * width || b_in.size() != width) throw Error("input layer shape mismatch");
    if (hidden_dim) {
        if (w_out.size() != hidden_dim * class_count || b_out.size() != class_count)
            throw Error("output layer shape mismatch");
    } else if (!w_out.empty() || !b_out.empty()) {
        throw Error("linear model must not carry output-layer weights");
    }
    for (const auto* block : {&w_in, &b_in, &w_out, &b_out}) {
        for (double v : *block) {
            if (!std::isfinite(v)) throw NumericError("non-finite parameter");
        }
    }
}

ClassifierParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::size_t class_count,
                             std::uint64_t seed, double dropout_rate) {
    if (input_dim < 1 || class_count < 1) throw Error("init_params: dims must be >= 1");
    ClassifierParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.class_count = class_count;
    p.dropout_rate = dropout_rate;
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout_rate must be in [0, 1)");

    Rng rng(seed);
    auto fill = [&](std::vector<double>& w, std::size_t n, std::size_t fan_in) {
        const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
        w.resize(n);
        for (auto& v : w) v = (2.0 * rng.uniform() - 1.0) * r;
    };
    const std::size_t width = p.first_width();
    fill(p.w_in, input_dim * width, input_dim);
    p.b_in.assign(width, 0.0);
    if (hidden_dim) {
        fill(p.w_out, hidden_dim * class_count, hidden_dim);
        p.b_out.assign(class_count, 0.0);
    }
    return p;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> l(logits.begin(), logits.end()), p, lp;
    softmax_into(l, p, lp);
    return p;
}

ForwardResult forward(const ClassifierParams& params, const FeatureVector& x) {
    check_input(params, x);
    Activations act;
    run_forward(params, x, 0, nullptr, act);
    return to_result(act);
}

ForwardResult forward_dropout(const ClassifierParams& params, const FeatureVector& x, Rng& rng) {
    check_input(params, x);
    Activations act;
    run_forward(params, x, 1, &rng, act);
    return to_result(act);
}

std::size_t predict(const ClassifierParams& params, const FeatureVector& x) {
    return forward(params, x).probs.argmax();
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

void Gradient::reset(const ClassifierParams& params) {
    width = params.first_width();
    rows.clear();
    w_in_rows.clear();
    slot_.clear();
    b_in.assign(width, 0.0);
    w_out.assign(params.w_out.size(), 0.0);
    b_out.assign(params.b_out.size(), 0.0);
}

double* Gradient::row(std::uint32_t input_index) {
    auto [it, inserted] = slot_.try_emplace(input_index, rows.size());
    if (inserted) {
        rows.push_back(input_index);
        w_in_rows.resize(w_in_rows.size() + width, 0.0);
    }
    return &w_in_rows[it->second * width];
}

ClassifierParams Gradient::to_dense(const ClassifierParams& shape) const {
    ClassifierParams d = shape;
    std::fill(d.w_in.begin(), d.w_in.end(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(&w_in_rows[r * width], width, &d.w_in[static_cast<std::size_t>(rows[r]) * width]);
    }
    d.b_in = b_in;
    d.w_out = w_out;
    d.b_out = b_out;
    return d;
}

namespace {

double batch_loss_and_gradient(const ClassifierParams& p, std::span<const TrainingExample* const> batch,
                               Gradient& grad, Rng* dropout_rng) {
    grad.reset(p);
    double total_weight = 0.0;
    for (const auto* ex : batch) {
        if (!(ex->weight >= 0.0)) throw Error("training example weight must be >= 0");
        total_weight += ex->weight;
    }
    if (total_weight <= 0.0) return 0.0;

    const std::size_t width = p.first_width();
    const std::size_t classes = p.class_count;
    Activations act;
    std::vector<double> g(classes), dh(p.hidden_dim);
    double loss = 0.0;
    for (const auto* exp : batch) {
        const TrainingExample& ex = *exp;
        if (ex.weight == 0.0) continue;
        check_input(p, ex.x);
        if (ex.y.size() != classes) throw Error("label distribution size does not match class count");
        run_forward(p, ex.x, dropout_rng ? 1 : 0, dropout_rng, act);
        const bool drop = !act.keep.empty();

        const double scale = ex.weight / total_weight;
        double ce = 0.0, y_sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double y = ex.y.probs[c];
            if (y != 0.0) ce -= y * act.log_probs[c];
            y_sum += y;
        }
        loss += scale * ce;
        for (std::size_t c = 0; c < classes; ++c) g[c] = scale * (act.probs[c] * y_sum - ex.y.probs[c]);

        if (p.is_linear()) {
            for (std::size_t c = 0; c < classes; ++c) grad.b_in[c] += g[c];
            for (std::size_t e = 0; e < ex.x.entries.size(); ++e) {
                const auto [i, xv] = ex.x.entries[e];
                const double v = drop ? xv * act.keep[e] : xv;
                if (v == 0.0) continue;
                double* row = grad.row(i);
                for (std::size_t c = 0; c < classes; ++c) row[c] += v * g[c];
            }
            continue;
        }

        for (std::size_t c = 0; c < classes; ++c) grad.b_out[c] += g[c];
        for (std::size_t j = 0; j < p.hidden_dim; ++j) {
            const double kj = drop ? act.keep[j] : 1.0;
            const double hv = act.h[j] * kj;
            const double* wrow = &p.w_out[j * classes];
            double* grow = &grad.w_out[j * classes];
            double back = 0.0;
            for (std::size_t c = 0; c < classes; ++c) {
                grow[c] += hv * g[c];
                back += wrow[c] * g[c];
            }
            dh[j] = back * kj * (1.0 - act.h[j] * act.h[j]);
            grad.b_in[j] += dh[j];
        }
        for (const auto& [i, xv] : ex.x.entries) {
            if (xv == 0.0) continue;
            double* row = grad.row(i);
            for (std::size_t j = 0; j < width; ++j) row[j] += xv * dh[j];
        }
    }
    return loss;
}

std::vector<const TrainingExample*> pointers(std::span<const TrainingExample> batch) {
    std::vector<const TrainingExample*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& ex : batch) ptrs.push_back(&ex);
    return ptrs;
}

}  // namespace

double loss_and_gradient(const ClassifierParams& p, std::span<const TrainingExample> batch, Gradient& grad,
                         Rng* dropout_rng) {
    const auto ptrs = pointers(batch);
    return batch_loss_and_gradient(p, ptrs, grad, dropout_rng);
}

double objective(const ClassifierParams& params, std::span<const TrainingExample> batch) {
    Gradient g;
    return loss_and_gradient(params, batch, g, nullptr);
}

Trainer::Trainer(ClassifierParams params, TrainConfig config)
    : params_(std::move(params)),
      config_(config),
      shuffle_rng_(derive_seed(config.seed, 0x5348)),
      dropout_rng_(derive_seed(config.seed, 0x4450)) {
    config_.validate();
    params_.validate();
    if (config_.optimizer == Optimizer::adam) {
        m_.assign(params_.parameter_count(), 0.0);
        v_.assign(params_.parameter_count(), 0.0);
    }
}

double Trainer::step(std::span<const TrainingExample> batch) {
    const auto ptrs = pointers(batch);
    return step_pointers(ptrs);
}

double Trainer::step_pointers(std::span<const TrainingExample* const> batch) {
    Rng* rng = params_.dropout_rate > 0.0 ? &dropout_rng_ : nullptr;
    const double loss = batch_loss_and_gradient(params_, batch, grad_, rng);
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epochs_run_ << ", step " << t_;
        throw NumericError(msg.str());
    }
    apply(grad_);
    return loss;
}

void Trainer::apply(const Gradient& g) {
    const std::size_t width = params_.first_width();
    const double lr = config_.learning_rate;
    const double wd = config_.weight_decay;
    const std::size_t off_b_in = params_.w_in.size();
    const std::size_t off_w_out = off_b_in + params_.b_in.size();
    const std::size_t off_b_out = off_w_out + params_.w_out.size();
    ++t_;

    if (config_.optimizer == Optimizer::sgd) {
        for (std::size_t r = 0; r < g.rows.size(); ++r) {
            double* w = &params_.w_in[static_cast<std::size_t>(g.rows[r]) * width];
            const double* d = &g.w_in_rows[r * width];
            for (std::size_t j = 0; j < width; ++j) w[j] -= lr * (d[j] + wd * w[j]);
        }
        for (std::size_t j = 0; j < params_.b_in.size(); ++j) params_.b_in[j] -= lr * g.b_in[j];
        for (std::size_t j = 0; j < params_.w_out.size(); ++j)
            params_.w_out[j] -= lr * (g.w_out[j] + wd * params_.w_out[j]);
        for (std::size_t j = 0; j < params_.b_out.size(); ++j) params_.b_out[j] -= lr * g.b_out[j];
        return;
    }

    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    const double step_size = lr * std::sqrt(bc2) / bc1;
    auto update = [&](double& w, double grad, std::size_t k) {
        m_[k] = kAdamBeta1 * m_[k] + (1.0 - kAdamBeta1) * grad;
        v_[k] = kAdamBeta2 * v_[k] + (1.0 - kAdamBeta2) * grad * grad;
        w -= step_size * m_[k] / (std::sqrt(v_[k]) + kAdamEps);
    };
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
        const std::size_t base = static_cast<std::size_t>(g.rows[r]) * width;
        const double* d = &g.w_in_rows[r * width];
        for (std::size_t j = 0; j < width; ++j) {
            double& w = params_.w_in[base + j];
            update(w, d[j] + wd * w, base + j);
        }
    }
    for (std::size_t j = 0; j < params_.b_in.size(); ++j) update(params_.b_in[j], g.b_in[j], off_b_in + j);
    for (std::size_t j = 0; j < params_.w_out.size(); ++j) {
        double& w = params_.w_out[j];
        update(w, g.w_out[j] + wd * w, off_w_out + j);
    }
    for (std::size_t j = 0; j < params_.b_out.size(); ++j) update(params_.b_out[j], g.b_out[j], off_b_out + j);
}

double Trainer::run_epoch(std::span<const TrainingExample> examples) {
    order_.resize(examples.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    shuffle_rng_.shuffle(order_.begin(), order_.end());

    std::vector<const TrainingExample*> batch;
    double weighted_loss = 0.0, total_weight = 0.0;
    for (std::size_t start = 0; start < order_.size(); start += config_.batch_size) {
        const std::size_t end = std::min(order_.size(), start + config_.batch_size);
        batch.clear();
        double w = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            batch.push_back(&examples[order_[k]]);
            w += examples[order_[k]].weight;
        }
        if (w <= 0.0) continue;
        weighted_loss += step_pointers(batch) * w;
        total_weight += w;
    }
    ++epochs_run_;
    return total_weight > 0.0 ? weighted_loss / total_weight : 0.0;
}

TrainResult train(ClassifierParams params, std::span<const TrainingExample> examples, const TrainConfig& config) {
    if (examples.empty()) throw Error("train: at least one example is required");
    config.validate();
    TrainResult result;
    if (config.epochs == 0) {
        result.params = std::move(params);
        return result;
    }
    Trainer trainer(std::move(params), config);
    for (std::size_t e = 0; e < config.epochs; ++e) result.loss_history.push_back(trainer.run_epoch(examples));
    result.params = std::move(trainer).release();
    return result;
}

McDropoutResult mc_dropout_predict(const ClassifierParams& params, const FeatureVector& x, std::size_t samples,
                                   std::uint64_t seed, bool shared_mask) {
    if (!(params.dropout_rate > 0.0)) throw Error("mc_dropout_predict requires dropout_rate > 0");
    if (samples < 2) throw Error("mc_dropout_predict requires at least 2 samples");
    check_input(params, x);

    const std::size_t classes = params.class_count;
    Rng rng(seed);
    Activations act;
    std::vector<std::vector<double>> draws;
    draws.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        if (shared_mask && s > 0) {
            run_forward(params, x, 2, nullptr, act);
        } else {
            run_forward(params, x, 1, &rng, act);
        }
        draws.push_back(act.probs);
    }
    McDropoutResult r;
    r.mean.probs.assign(classes, 0.0);
    r.variance.assign(classes, 0.0);
    const double n = static_cast<double>(samples);
    // Running mean: identical draws give back that exact value, so variance is exactly 0.
    for (std::size_t s = 0; s < samples; ++s)
        for (std::size_t c = 0; c < classes; ++c)
            r.mean.probs[c] += (draws[s][c] - r.mean.probs[c]) / static_cast<double>(s + 1);
    for (const auto& d : draws) {
        for (std::size_t c = 0; c < classes; ++c) {
            const double diff = d[c] - r.mean.probs[c];
            r.variance[c] += diff * diff;
        }
    }
    for (auto& v : r.variance) v /= (n - 1.0);
    return r;
}

double margin(std::span<const double> logits, std::size_t assigned) {
    if (logits.size() < 2) throw Error("margin requires at least 2 classes");
    if (assigned >= logits.size()) throw Error("margin: assigned class out of range");
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < logits.size(); ++c) {
        if (c != assigned) best_other = std::max(best_other, logits[c]);
    }
    return logits[assigned] - best_other;
}

void save_params(std::ostream& out, const ClassifierParams& p) {
    p.validate();
    out.write(kParamsMagic.data(), kParamsMagic.size());
    write_pod<std::uint32_t>(out, kParamsVersion);
    write_pod<std::uint64_t>(out, p.input_dim);
    write_pod<std::uint64_t>(out, p.hidden_dim);
    write_pod<std::uint64_t>(out, p.class_count);
    write_pod<double>(out, p.dropout_rate);
    for (const auto* block : {&p.w_in, &p.b_in, &p.w_out, &p.b_out}) {
        out.write(reinterpret_cast<const char*>(block->data()),
                  static_cast<std::streamsize>(block->size() * sizeof(double)));
    }
    if (!out) throw Error("failed writing params");
}

ClassifierParams load_params(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kParamsMagic) throw ParseError("not a params file");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kParamsVersion) throw ParseError("unsupported params version " + std::to_string(version));
    ClassifierParams p;
    p.input_dim = read_pod<std::uint64_t>(in);
    p.hidden_dim = read_pod<std::uint64_t>(in);
    p.class_count = read_pod<std::uint64_t>(in);
    p.dropout_rate = read_pod<double>(in);
    if (p.input_dim == 0 || p.class_count < 2 || p.input_dim > (std::size_t{1} << 32) || p.hidden_dim > 1u << 20 ||
        p.class_count > 1u << 20)
        throw ParseError("params file has implausible dimensions");
    const std::size_t width = p.first_width();
    p.w_in.resize(p.input_dim * width);
    p.b_in.resize(width);
    if (p.hidden_dim) {
        p.w_out.resize(p.hidden_dim * p.class_count);
        p.b_out.resize(p.class_count);
    }
    for (auto* block : {&p.w_in, &p.b_in, &p.w_out, &p.b_out}) {
        if (!in.read(reinterpret_cast<char*>(block->data()), static_cast<std::streamsize>(block->size() * sizeof(double))))
            throw ParseError("truncated params file");
    }
    p.validate();
    return p;
}

void save_params(const std::filesystem::path& path, const ClassifierParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    save_params(out, params);
}

ClassifierParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return load_params(in);
}

}  // namespace crisis
