#include "crisis/strategies.hpp"

#include "crisis/error.hpp"
#include "crisis/mixup.hpp"
#include "strategy_common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace crisis {

namespace {

constexpr std::uint64_t kInitStream = 0x494E4954;
constexpr std::uint64_t kMcStream = 0x4D43;

constexpr std::array<std::pair<StrategyId, std::string_view>, 10> kNames{{
    {StrategyId::supervised, "supervised"},
    {StrategyId::self_train, "self_train"},
    {StrategyId::ust, "ust"},
    {StrategyId::mixmatch, "mixmatch"},
    {StrategyId::aum_st, "aum_st"},
    {StrategyId::conf_st_mixup, "conf_st_mixup"},
    {StrategyId::aum_st_mixup, "aum_st_mixup"},
    {StrategyId::verify_match, "verify_match"},
    {StrategyId::lg_cotrain, "lg_cotrain"},
    {StrategyId::sg_cotrain, "sg_cotrain"},
}};

std::size_t input_dim_of(const TaskData& task) {
    if (task.labeled.empty()) throw ConfigError("task has no labeled examples");
    return task.labeled.front().x.dim;
}

double val_macro_f1(const ClassifierParams& params, const TaskData& task) {
    return evaluate(params, task.val, task).macro_f1;
}

}  // namespace

std::string_view to_string(StrategyId id) {
    for (const auto& [k, name] : kNames)
        if (k == id) return name;
    return "unknown";
}

std::optional<StrategyId> parse_strategy(std::string_view name) {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    return std::nullopt;
}

const std::vector<StrategyId>& all_strategies() {
    static const std::vector<StrategyId> ids = [] {
        std::vector<StrategyId> v;
        for (const auto& [k, name] : kNames) v.push_back(k);
        return v;
    }();
    return ids;
}

bool uses_llm_labels(StrategyId id) { return id == StrategyId::verify_match || id == StrategyId::lg_cotrain; }

void StrategyConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0,1]");
    if (!(mixup_alpha > 0.0)) throw ConfigError("mixup alpha must be > 0");
    if (!(sharpen_temperature > 0.0 && sharpen_temperature <= 1.0))
        throw ConfigError("sharpening temperature must lie in (0,1]");
    if (!(aum_keep_percentile > 0.0 && aum_keep_percentile <= 100.0))
        throw ConfigError("AUM keep percentile must lie in (0,100]");
    if (uncertainty_samples < 2) throw ConfigError("uncertainty estimation needs at least 2 samples");
    if (!(low_weight >= 0.0 && low_weight <= 1.0)) throw ConfigError("low-confidence weight must lie in [0,1]");
    if (!(accept_fraction >= 0.0 && accept_fraction <= 1.0)) throw ConfigError("accept fraction must lie in [0,1]");
    if (guess_augmentations < 1) throw ConfigError("label guessing needs at least 1 augmentation");
    if (!(augment_drop >= 0.0 && augment_drop < 1.0)) throw ConfigError("augmentation drop rate must lie in [0,1)");
    if (verify_threshold && !std::isfinite(*verify_threshold)) throw ConfigError("verify threshold must be finite");
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace detail {

const TaskData& task_of(const StrategyContext& ctx) {
    if (!ctx.task) throw ConfigError("strategy context has no task");
    return *ctx.task;
}

TrainingExample hard_example(const FeatureVector& x, std::size_t label, std::size_t class_count, double weight) {
    return TrainingExample{x, LabelDistribution::one_hot(label, class_count), weight};
}

void append_mixed(std::vector<TrainingExample>& pool, std::span<const TrainingExample> anchors,
                  std::span<const TrainingExample> partners, double alpha, double weight, Rng& rng) {
    if (weight == 0.0 || partners.empty()) return;
    for (const auto& a : anchors) {
        const auto& b = partners[rng.below(partners.size())];
        const double lambda = draw_mix_lambda(rng, alpha);
        auto mixed = mixup(a.x, a.y, b.x, b.y, lambda);
        pool.push_back(TrainingExample{std::move(mixed.x), std::move(mixed.y), weight});
    }
}

void require_aligned(std::span<const PseudoLabel> labels, const TaskData& task, const char* who) {
    if (labels.size() != task.unlabeled.size())
        throw ConfigError(std::string(who) + " needs one pseudo-label per unlabeled example (got " +
                          std::to_string(labels.size()) + ", expected " + std::to_string(task.unlabeled.size()) +
                          ")");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].example_id != task.unlabeled[i].id)
            throw ConfigError(std::string(who) + ": pseudo-label " + std::to_string(i) + " is for '" +
                              labels[i].example_id + "', expected '" + task.unlabeled[i].id + "'");
        if (labels[i].label && *labels[i].label >= task.class_count)
            throw ConfigError(std::string(who) + ": pseudo-label out of range for " + labels[i].example_id);
    }
}

RunBuilder::RunBuilder(const StrategyConfig& config, const StrategyContext& ctx)
    : ctx_(ctx), start_(std::chrono::steady_clock::now()) {
    const auto& task = task_of(ctx);
    record_.label = std::string(to_string(config.id));
    record_.event_name = task.event_name;
    record_.budget = ctx.budget;
    record_.seed = ctx.seed;
    record_.strategy = config;
}

void RunBuilder::audit(std::size_t round, const Instance& inst, std::optional<std::size_t> pseudo, double score,
                       bool accepted) {
    if (!ctx_.record_audit) return;
    audit_.push_back(AuditEntry{round, inst.id, inst.gold, pseudo, score, accepted});
}

StrategyResult RunBuilder::finish(FitResult fit) {
    const auto& task = task_of(ctx_);
    record_.best_epoch = fit.best_epoch;
    record_.val = evaluate(fit.params, task.val, task);
    record_.test = evaluate(fit.params, task.test, task);
    record_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return StrategyResult{std::move(fit.params), std::move(record_), std::move(audit_)};
}

}  // namespace detail

std::vector<TrainingExample> labeled_pool(const TaskData& task) {
    std::vector<TrainingExample> pool;
    pool.reserve(task.labeled.size());
    for (const auto& inst : task.labeled) {
        if (!inst.gold) throw ConfigError("labeled example without gold label: " + inst.id);
        pool.push_back(detail::hard_example(inst.x, *inst.gold, task.class_count, 1.0));
    }
    return pool;
}

std::vector<std::vector<double>> predict_probabilities(const ClassifierParams& params,
                                                       std::span<const Instance> instances) {
    std::vector<std::vector<double>> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(forward(params, inst.x).probs.probs);
    return out;
}

MetricsReport evaluate(const ClassifierParams& params, std::span<const Instance> instances, const TaskData& task) {
    std::vector<std::vector<double>> probs;
    std::vector<std::size_t> golds;
    for (const auto& inst : instances) {
        if (!inst.gold) continue;
        probs.push_back(forward(params, inst.x).probs.probs);
        golds.push_back(*inst.gold);
    }
    return evaluate_predictions(probs, golds, task.class_count, task.active_classes);
}

FitResult fit_model(std::span<const TrainingExample> pool, const TaskData& task, const ModelConfig& model,
                    const TrainConfig& train, std::uint64_t seed) {
    TrainConfig config = train;
    config.seed = seed;
    config.validate();
    Trainer trainer(init_params(input_dim_of(task), model.hidden_dim, task.class_count,
                                derive_seed(seed, kInitStream), model.dropout_rate),
                    config);

    FitResult out;
    out.params = trainer.params();
    const bool select = std::any_of(task.val.begin(), task.val.end(), [](const Instance& i) { return i.gold; });
    out.val_macro_f1 = select ? val_macro_f1(out.params, task) : 0.0;
    if (pool.empty()) return out;

    for (std::size_t e = 1; e <= config.epochs; ++e) {
        out.loss_history.push_back(trainer.run_epoch(pool));
        if (!select) {
            if (e == config.epochs) {
                out.best_epoch = e;
                out.params = trainer.params();
            }
            continue;
        }
        const double f1 = val_macro_f1(trainer.params(), task);
        if (out.best_epoch == 0 || f1 > out.val_macro_f1) {
            out.best_epoch = e;
            out.val_macro_f1 = f1;
            out.params = trainer.params();
        }
    }
    return out;
}

std::vector<std::size_t> select_by_uncertainty(std::span<const UncertaintyScore> scores, double fraction,
                                               std::size_t class_count) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("accept fraction must lie in [0,1]");
    std::vector<std::vector<std::size_t>> by_class(class_count);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].predicted >= class_count) throw Error("uncertainty score has out-of-range class");
        by_class[scores[i].predicted].push_back(i);
    }
    std::vector<std::size_t> kept;
    for (auto& members : by_class) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a].variance != scores[b].variance) return scores[a].variance < scores[b].variance;
            return scores[a].confidence > scores[b].confidence;
        });
        const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(members.size()) - 1e-9));
        kept.insert(kept.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n));
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::vector<AumRecord> track_aum(ClassifierParams init, std::span<const TrainingExample> examples,
                                 const TrainConfig& train) {
    if (train.epochs < 2) throw ConfigError("AUM needs at least 2 training epochs");
    Trainer trainer(std::move(init), train);
    std::vector<AumRecord> records(examples.size());
    std::vector<std::size_t> assigned(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) assigned[i] = examples[i].y.argmax();
    for (std::size_t e = 0; e < train.epochs; ++e) {
        trainer.run_epoch(examples);
        for (std::size_t i = 0; i < examples.size(); ++i)
            records[i].margins.push_back(margin(forward(trainer.params(), examples[i].x).logits, assigned[i]));
    }
    for (auto& r : records)
        r.aum = std::accumulate(r.margins.begin(), r.margins.end(), 0.0) / static_cast<double>(r.margins.size());
    return records;
}

double verification_threshold(const ClassifierParams& params, std::span<const Instance> labeled) {
    double correct_sum = 0.0, all_sum = 0.0;
    std::size_t correct = 0, total = 0;
    for (const auto& inst : labeled) {
        if (!inst.gold) continue;
        const auto probs = forward(params, inst.x).probs;
        const std::size_t pred = probs.argmax();
        all_sum += probs.probs[pred];
        ++total;
        if (pred == *inst.gold) {
            correct_sum += probs.probs[pred];
            ++correct;
        }
    }
    if (total == 0) throw ConfigError("verification threshold needs labeled examples");
    return correct ? correct_sum / static_cast<double>(correct) : all_sum / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Supervised, self-training, UST

StrategyResult run_supervised(const StrategyContext& ctx) {
    const auto& task = detail::task_of(ctx);
    StrategyConfig config;
    config.id = StrategyId::supervised;
    config.rounds = 0;
    detail::RunBuilder run(config, ctx);
    const auto pool = labeled_pool(task);
    return run.finish(fit_model(pool, task, ctx.model, ctx.train, ctx.seed));
}

StrategyResult run_self_training(const StrategyConfig& config, const StrategyContext& ctx) {
    config.validate();
    const auto& task = detail::task_of(ctx);
    detail::RunBuilder run(config, ctx);
    const auto labeled = labeled_pool(task);
    FitResult teacher = fit_model(labeled, task, ctx.model, ctx.train, ctx.seed);

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        const auto labels = annotate_teacher(teacher.params, task.unlabeled);
        auto pool = labeled;
        RoundStats stats{r, 0, 0, 0};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const bool accept = labels[i].confidence >= config.threshold;
            run.audit(r, task.unlabeled[i], labels[i].label, labels[i].confidence, accept);
            if (!accept) {
                ++stats.rejected;
                continue;
            }
            ++stats.accepted;
            pool.push_back(detail::hard_example(task.unlabeled[i].x, *labels[i].label, task.class_count, 1.0));
        }
        run.add_round(stats);
        if (stats.accepted == 0) {
            run.note("round " + std::to_string(r) + " accepted no pseudo-labels; stopping");
            break;
        }
        teacher = fit_model(pool, task, ctx.model, ctx.train, ctx.seed);
    }
    return run.finish(std::move(teacher));
}

StrategyResult run_ust(const StrategyConfig& config, const StrategyContext& ctx) {
    config.validate();
    if (!(ctx.model.dropout_rate > 0.0)) throw ConfigError("UST needs a model with dropout > 0");
    const auto& task = detail::task_of(ctx);
    detail::RunBuilder run(config, ctx);
    const auto labeled = labeled_pool(task);
    FitResult teacher = fit_model(labeled, task, ctx.model, ctx.train, ctx.seed);

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        const std::uint64_t round_seed = derive_seed(ctx.seed, kMcStream + r);
        std::vector<UncertaintyScore> scores(task.unlabeled.size());
        double max_var = 0.0;
        for (std::size_t i = 0; i < task.unlabeled.size(); ++i) {
            const auto mc = mc_dropout_predict(teacher.params, task.unlabeled[i].x, config.uncertainty_samples,
                                               derive_seed(round_seed, i));
            const std::size_t pred = mc.mean.argmax();
            scores[i] = {pred, mc.mean.probs[pred], mc.variance[pred]};
            max_var = std::max(max_var, scores[i].variance);
        }
        const auto kept = select_by_uncertainty(scores, config.accept_fraction, task.class_count);
        std::vector<bool> is_kept(scores.size(), false);
        for (const auto i : kept) is_kept[i] = true;

        auto pool = labeled;
        RoundStats stats{r, 0, 0, 0};
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double w = max_var > 0.0 ? 1.0 - scores[i].variance / max_var : 1.0;
            run.audit(r, task.unlabeled[i], scores[i].predicted, w, is_kept[i]);
            if (!is_kept[i]) {
                ++stats.rejected;
                continue;
            }
            ++stats.accepted;
            if (w > 0.0)
                pool.push_back(detail::hard_example(task.unlabeled[i].x, scores[i].predicted, task.class_count, w));
        }
        run.add_round(stats);
        if (pool.size() == labeled.size()) {
            run.note("round " + std::to_string(r) + " added no weighted pseudo-labels; stopping");
            break;
        }
        teacher = fit_model(pool, task, ctx.model, ctx.train, ctx.seed);
    }
    return run.finish(std::move(teacher));
}

StrategyResult run_strategy(const StrategyConfig& config, const StrategyContext& ctx) {
    config.validate();
    const auto& task = detail::task_of(ctx);
    switch (config.id) {
        case StrategyId::supervised: return run_supervised(ctx);
        case StrategyId::self_train: return run_self_training(config, ctx);
        case StrategyId::ust: return run_ust(config, ctx);
        case StrategyId::mixmatch: return run_mixmatch(config, ctx);
        case StrategyId::aum_st: return run_aum_st(config, ctx, false);
        case StrategyId::aum_st_mixup: return run_aum_st(config, ctx, true);
        case StrategyId::conf_st_mixup: return run_conf_st_mixup(config, ctx);
        case StrategyId::verify_match: return run_verify_match(config, ctx);
        case StrategyId::lg_cotrain: return run_cotrain(config, ctx, ctx.llm_labels);
        case StrategyId::sg_cotrain: {
            const auto teacher = fit_model(labeled_pool(task), task, ctx.model, ctx.train, ctx.seed);
            const auto labels = annotate_teacher(teacher.params, task.unlabeled);
            return run_cotrain(config, ctx, labels);
        }
    }
    throw ConfigError("unknown strategy");
}

}  // namespace crisis
