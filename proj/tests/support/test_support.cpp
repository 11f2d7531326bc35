#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <unistd.h>

namespace fs = std::filesystem;

namespace crisis::testing {

TempDir::TempDir(const std::string& prefix) {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            (prefix + "_" + std::to_string(::getpid()) + "_" + std::to_string(stamp) + "_" +
             std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

Flags::Flags(std::size_t n, bool value) : data_(new bool[n]), n_(n) { std::fill_n(data_.get(), n, value); }

Flags::Flags(std::initializer_list<bool> init) : data_(new bool[init.size()]), n_(init.size()) {
    std::copy(init.begin(), init.end(), data_.get());
}

Flags::Flags(const Flags& other) : data_(new bool[other.n_]), n_(other.n_) {
    std::copy_n(other.data_.get(), n_, data_.get());
}

Flags& Flags::operator=(const Flags& other) {
    Flags copy(other);
    std::swap(data_, copy.data_);
    std::swap(n_, copy.n_);
    return *this;
}

LabelSchema letter_schema(std::size_t class_count) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < class_count; ++c) names.push_back("c" + std::to_string(c));
    return LabelSchema(std::move(names));
}

FeaturizerConfig small_featurizer() {
    FeaturizerConfig f;
    f.dim = std::size_t{1} << 12;
    return f;
}

TaskData separable_task(const SeparableSpec& spec) {
    const auto schema = letter_schema(spec.classes);
    const auto corpus = make_synthetic_corpus(
        "sep", schema,
        separable_config(spec.classes, spec.train_per_class, spec.val_per_class, spec.test_per_class,
                         spec.corpus_seed));
    return build_task(corpus, make_split_plan(corpus, spec.budget, spec.split_seed), small_featurizer());
}

TaskData noisy_task(std::size_t classes, std::size_t train_per_class, std::size_t budget, std::uint64_t split_seed) {
    SyntheticConfig c;
    c.train_counts.assign(classes, train_per_class);
    c.val_counts.assign(classes, 30);
    c.test_counts.assign(classes, 60);
    c.class_vocab = 60;
    c.background_vocab = 400;
    c.signal_rate = 0.25;
    c.cross_signal_rate = 0.15;
    c.seed = 77;
    const auto corpus = make_synthetic_corpus("noisy", letter_schema(classes), c);
    return build_task(corpus, make_split_plan(corpus, budget, split_seed), small_featurizer());
}

ModelConfig small_model(std::size_t hidden, double dropout) {
    ModelConfig m;
    m.hidden_dim = hidden;
    m.dropout_rate = dropout;
    return m;
}

TrainConfig fast_train(std::size_t epochs, double lr) {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = lr;
    t.batch_size = 16;
    return t;
}

StrategyContext context(const TaskData& task, std::uint64_t seed, std::span<const PseudoLabel> llm) {
    StrategyContext ctx;
    ctx.task = &task;
    ctx.model = small_model();
    ctx.train = fast_train();
    ctx.seed = seed;
    ctx.llm_labels = llm;
    return ctx;
}

double oracle_macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> golds,
                       std::size_t class_count, std::span<const std::size_t> active) {
    std::vector<std::size_t> classes(active.begin(), active.end());
    if (classes.empty())
        for (std::size_t c = 0; c < class_count; ++c) classes.push_back(c);
    double sum = 0.0;
    for (const auto c : classes) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < golds.size(); ++i) {
            const bool p = predictions[i] == c, g = golds[i] == c;
            tp += p && g;
            fp += p && !g;
            fn += !p && g;
        }
        const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    return sum / static_cast<double>(classes.size());
}

double oracle_ece(std::span<const double> confidences, std::span<const bool> correct, std::size_t bins) {
    const double n = static_cast<double>(confidences.size());
    double ece = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        const double lo = static_cast<double>(b) / static_cast<double>(bins);
        const double hi = static_cast<double>(b + 1) / static_cast<double>(bins);
        double count = 0, conf = 0, acc = 0;
        for (std::size_t i = 0; i < confidences.size(); ++i) {
            const double c = confidences[i];
            const bool in = c >= lo && (c < hi || (b + 1 == bins && c <= 1.0));
            if (!in) continue;
            ++count;
            conf += c;
            acc += correct[i] ? 1.0 : 0.0;
        }
        if (count > 0) ece += count / n * std::abs(acc / count - conf / count);
    }
    return ece;
}

std::vector<PseudoLabel> gold_labels(const TaskData& task) {
    std::vector<PseudoLabel> out;
    for (const auto& inst : task.unlabeled) {
        PseudoLabel p;
        p.example_id = inst.id;
        p.label = inst.gold;
        out.push_back(p);
    }
    return out;
}

std::string class_text(std::size_t cls, std::size_t variant) {
    const std::string k = "k" + std::to_string(cls);
    return k + "a " + k + "b " + k + "c w" + std::to_string(variant % 7) + " " + k + "v" +
           std::to_string(variant);
}

}  // namespace crisis::testing

namespace crisis::testing {

double max_gradient_error(const ClassifierParams& params, std::span<const TrainingExample> batch, double eps,
                          double floor) {
    Gradient g;
    loss_and_gradient(params, batch, g);
    const auto analytic = g.to_dense(params);
    ClassifierParams probe = params;
    double worst = 0.0;
    auto check = [&](std::vector<double>& p, const std::vector<double>& a) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p[i];
            p[i] = saved + eps;
            const double up = objective(probe, batch);
            p[i] = saved - eps;
            const double down = objective(probe, batch);
            p[i] = saved;
            const double numeric = (up - down) / (2 * eps);
            const double denom = std::max({std::abs(a[i]), std::abs(numeric), floor});
            worst = std::max(worst, std::abs(a[i] - numeric) / denom);
        }
    };
    check(probe.w_in, analytic.w_in);
    check(probe.b_in, analytic.b_in);
    check(probe.w_out, analytic.w_out);
    check(probe.b_out, analytic.b_out);
    return worst;
}

std::vector<TrainingExample> random_batch(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed,
                                          bool soft) {
    Rng rng(seed);
    std::vector<TrainingExample> out;
    for (std::size_t i = 0; i < n; ++i) {
        TrainingExample ex;
        ex.x.dim = dim;
        for (std::size_t j = 0; j < dim; ++j)
            if (rng.uniform() < 0.7) ex.x.entries.emplace_back(static_cast<std::uint32_t>(j), rng.uniform() * 2 - 1);
        if (soft) {
            ex.y.probs.resize(classes);
            double s = 0;
            for (auto& p : ex.y.probs) s += p = rng.uniform() + 0.05;
            for (auto& p : ex.y.probs) p /= s;
        } else {
            ex.y = LabelDistribution::one_hot(rng.below(classes), classes);
        }
        ex.weight = 0.5 + rng.uniform();
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace crisis::testing
