#include "crisis/error.hpp"
#include "crisis/mixup.hpp"
#include "crisis/strategies.hpp"
#include "strategy_common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crisis {

namespace {

constexpr std::uint64_t kMixMatchTrainStream = 0x4D4D54;
constexpr std::uint64_t kMixMatchStream = 0x4D4D58;
constexpr std::uint64_t kProbeInitStream = 0x50524931;
constexpr std::uint64_t kProbeTrainStream = 0x50525431;
constexpr std::uint64_t kPoolMixStream = 0x504D58;

}  // namespace

StrategyResult run_mixmatch(const StrategyConfig& config, const StrategyContext& ctx) {
    config.validate();
    const auto& task = detail::task_of(ctx);
    detail::RunBuilder run(config, ctx);
    const auto labeled = labeled_pool(task);
    FitResult best = fit_model(labeled, task, ctx.model, ctx.train, ctx.seed);
    if (config.rounds == 0 || task.unlabeled.empty()) return run.finish(std::move(best));

    TrainConfig train = ctx.train;
    train.seed = derive_seed(ctx.seed, kMixMatchTrainStream);
    Trainer trainer(best.params, train);
    Rng rng(derive_seed(ctx.seed, kMixMatchStream));
    const std::size_t batch = train.batch_size;
    const std::size_t k = task.class_count;

    std::vector<std::size_t> u_order(task.unlabeled.size());
    std::iota(u_order.begin(), u_order.end(), 0);
    std::vector<std::size_t> l_order(labeled.size());
    std::iota(l_order.begin(), l_order.end(), 0);
    std::size_t l_pos = l_order.size();

    std::vector<TrainingExample> sources;
    std::vector<std::size_t> w_order;
    std::vector<TrainingExample> step_batch;
    const bool has_val = !task.val.empty();

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        rng.shuffle(u_order.begin(), u_order.end());
        for (std::size_t start = 0; start < u_order.size(); start += batch) {
            const std::size_t end = std::min(start + batch, u_order.size());
            const std::size_t n = end - start;
            sources.clear();

            // Labeled half, cycling through a reshuffled D_L.
            for (std::size_t i = 0; i < n; ++i) {
                if (l_pos == l_order.size()) {
                    rng.shuffle(l_order.begin(), l_order.end());
                    l_pos = 0;
                }
                const auto& ex = labeled[l_order[l_pos++]];
                sources.push_back(TrainingExample{augment_features(ex.x, config.augment_drop, rng), ex.y, 1.0});
            }
            // Unlabeled half: averaged, sharpened guesses over K augmentations.
            for (std::size_t i = start; i < end; ++i) {
                const auto& x = task.unlabeled[u_order[i]].x;
                std::vector<double> avg(k, 0.0);
                FeatureVector first;
                for (std::size_t a = 0; a < config.guess_augmentations; ++a) {
                    auto aug = augment_features(x, config.augment_drop, rng);
                    const auto probs = forward(trainer.params(), aug).probs;
                    for (std::size_t c = 0; c < k; ++c) avg[c] += probs.probs[c];
                    if (a == 0) first = std::move(aug);
                }
                for (auto& p : avg) p /= static_cast<double>(config.guess_augmentations);
                sources.push_back(TrainingExample{std::move(first),
                                                  sharpen(LabelDistribution{std::move(avg)},
                                                          config.sharpen_temperature),
                                                  config.low_weight});
            }

            w_order.resize(sources.size());
            std::iota(w_order.begin(), w_order.end(), 0);
            rng.shuffle(w_order.begin(), w_order.end());
            step_batch.clear();
            for (std::size_t i = 0; i < sources.size(); ++i) {
                const auto& a = sources[i];
                const auto& b = sources[w_order[i]];
                const double lambda = draw_mix_lambda(rng, config.mixup_alpha);
                if (a.weight == 0.0) continue;
                auto mixed = mixup(a.x, a.y, b.x, b.y, lambda);
                step_batch.push_back(TrainingExample{std::move(mixed.x), std::move(mixed.y), a.weight});
            }
            trainer.step(step_batch);
        }
        run.add_round(RoundStats{r, task.unlabeled.size(), 0, 0});

        if (has_val) {
            const double f1 = evaluate(trainer.params(), task.val, task).macro_f1;
            if (f1 > best.val_macro_f1) {
                best.val_macro_f1 = f1;
                best.params = trainer.params();
                best.best_epoch = best.loss_history.size() + r;
            }
        } else if (r == config.rounds) {
            best.params = trainer.params();
            best.best_epoch = best.loss_history.size() + r;
        }
    }
    return run.finish(std::move(best));
}

StrategyResult run_aum_st(const StrategyConfig& config, const StrategyContext& ctx, bool with_mixup) {
    config.validate();
    const auto& task = detail::task_of(ctx);
    if (ctx.train.epochs < 2) throw ConfigError("AUM-ST needs at least 2 training epochs");
    StrategyConfig recorded = config;
    recorded.id = with_mixup ? StrategyId::aum_st_mixup : StrategyId::aum_st;
    detail::RunBuilder run(recorded, ctx);
    const auto labeled = labeled_pool(task);
    FitResult teacher = fit_model(labeled, task, ctx.model, ctx.train, ctx.seed);
    const std::size_t dim = task.labeled.front().x.dim;

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        const auto labels = annotate_teacher(teacher.params, task.unlabeled);
        if (labels.empty()) break;
        auto probe_pool = labeled;
        for (std::size_t i = 0; i < labels.size(); ++i)
            probe_pool.push_back(detail::hard_example(task.unlabeled[i].x, *labels[i].label, task.class_count, 1.0));

        TrainConfig probe_train = ctx.train;
        probe_train.seed = derive_seed(ctx.seed, kProbeTrainStream + r);
        auto records =
            track_aum(init_params(dim, ctx.model.hidden_dim, task.class_count,
                                  derive_seed(ctx.seed, kProbeInitStream + r), ctx.model.dropout_rate),
                      probe_pool, probe_train);
        for (std::size_t i = 0; i < task.labeled.size(); ++i) records[i].example_id = task.labeled[i].id;
        for (std::size_t i = 0; i < labels.size(); ++i) records[labeled.size() + i].example_id = labels[i].example_id;

        // Rank within each pseudo-class so the dominant class cannot crowd out the rest.
        const auto aum_of = [&](std::size_t i) { return records[labeled.size() + i].aum; };
        std::vector<std::vector<std::size_t>> by_class(task.class_count);
        for (std::size_t i = 0; i < labels.size(); ++i) by_class[*labels[i].label].push_back(i);
        std::vector<bool> kept(labels.size(), false);
        for (auto& members : by_class) {
            std::stable_sort(members.begin(), members.end(),
                             [&](std::size_t a, std::size_t b) { return aum_of(a) > aum_of(b); });
            const auto keep = std::min(
                members.size(), static_cast<std::size_t>(std::ceil(
                                    config.aum_keep_percentile / 100.0 * static_cast<double>(members.size()) - 1e-9)));
            for (std::size_t j = 0; j < keep; ++j) kept[members[j]] = true;
        }

        auto pool = labeled;
        std::vector<TrainingExample> kept_examples;
        RoundStats stats{r, 0, 0, 0};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            run.audit(r, task.unlabeled[i], labels[i].label, aum_of(i), kept[i]);
            if (!kept[i]) {
                ++stats.rejected;
                continue;
            }
            ++stats.accepted;
            kept_examples.push_back(detail::hard_example(task.unlabeled[i].x, *labels[i].label, task.class_count, 1.0));
        }
        pool.insert(pool.end(), kept_examples.begin(), kept_examples.end());
        if (with_mixup) {
            Rng rng(derive_seed(ctx.seed, kPoolMixStream + r));
            detail::append_mixed(pool, kept_examples, labeled, config.mixup_alpha, 1.0, rng);
        }
        run.add_round(stats);
        teacher = fit_model(pool, task, ctx.model, ctx.train, ctx.seed);
    }
    return run.finish(std::move(teacher));
}

StrategyResult run_conf_st_mixup(const StrategyConfig& config, const StrategyContext& ctx) {
    config.validate();
    const auto& task = detail::task_of(ctx);
    detail::RunBuilder run(config, ctx);
    const auto labeled = labeled_pool(task);
    FitResult teacher = fit_model(labeled, task, ctx.model, ctx.train, ctx.seed);

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        std::vector<TrainingExample> high, low;
        RoundStats stats{r, 0, 0, 0};
        for (const auto& inst : task.unlabeled) {
            const auto probs = forward(teacher.params, inst.x).probs;
            const std::size_t label = probs.argmax();
            const double gap = confidence_gap(probs);
            const bool is_high = gap >= config.threshold;
            run.audit(r, inst, label, gap, is_high);
            auto ex = detail::hard_example(inst.x, label, task.class_count, 1.0);
            if (is_high) {
                ++stats.accepted;
                high.push_back(std::move(ex));
            } else {
                ++stats.rejected;
                low.push_back(std::move(ex));
            }
        }
        run.add_round(stats);

        auto pool = labeled;
        Rng rng(derive_seed(ctx.seed, kPoolMixStream + r));
        detail::append_mixed(pool, high, labeled, config.mixup_alpha, 1.0, rng);
        detail::append_mixed(pool, low, labeled, config.mixup_alpha, config.low_weight, rng);
        detail::append_mixed(pool, low, high, config.mixup_alpha, config.low_weight, rng);
        if (pool.size() == labeled.size()) {
            run.note("round " + std::to_string(r) + " produced no weighted training pairs; stopping");
            break;
        }
        teacher = fit_model(pool, task, ctx.model, ctx.train, ctx.seed);
    }
    return run.finish(std::move(teacher));
}

}  // namespace crisis
