#include "crisis/error.hpp"
#include "crisis/strategies.hpp"
#include "strategy_common.hpp"

namespace crisis {

namespace {

constexpr std::uint64_t kVerifyMixStream = 0x564D58;
constexpr std::uint64_t kSecondModelStream = 0x434F42;

}  // namespace

StrategyResult run_verify_match(const StrategyConfig& config, const StrategyContext& ctx) {
    config.validate();
    const auto& task = detail::task_of(ctx);
    detail::require_aligned(ctx.llm_labels, task, "VerifyMatch");
    detail::RunBuilder run(config, ctx);
    const auto labeled = labeled_pool(task);
    FitResult model = fit_model(labeled, task, ctx.model, ctx.train, ctx.seed);

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        const double cut = config.verify_threshold.value_or(verification_threshold(model.params, task.labeled));
        std::vector<TrainingExample> verified, unverified;
        RoundStats stats{r, 0, 0, 0};
        for (std::size_t i = 0; i < task.unlabeled.size(); ++i) {
            const auto& pl = ctx.llm_labels[i];
            const auto& inst = task.unlabeled[i];
            if (pl.is_oos()) {
                ++stats.oos;
                run.audit(r, inst, std::nullopt, 0.0, false);
                continue;
            }
            const double p = forward(model.params, inst.x).probs.probs[*pl.label];
            const bool ok = p >= cut;
            run.audit(r, inst, pl.label, p, ok);
            auto ex = detail::hard_example(inst.x, *pl.label, task.class_count, 1.0);
            if (ok) {
                ++stats.accepted;
                verified.push_back(std::move(ex));
            } else {
                ++stats.rejected;
                unverified.push_back(std::move(ex));
            }
        }
        run.add_round(stats);
        if (stats.oos == task.unlabeled.size() && !task.unlabeled.empty())
            run.note("every LLM pseudo-label was out of schema; falling back to supervised");

        auto pool = labeled;
        pool.insert(pool.end(), verified.begin(), verified.end());
        Rng rng(derive_seed(ctx.seed, kVerifyMixStream + r));
        detail::append_mixed(pool, unverified, labeled, config.mixup_alpha, config.low_weight, rng);
        if (pool.size() == labeled.size()) {
            run.note("round " + std::to_string(r) + " produced no weighted pseudo-labels; stopping");
            break;
        }
        model = fit_model(pool, task, ctx.model, ctx.train, ctx.seed);
    }
    return run.finish(std::move(model));
}

StrategyResult run_cotrain(const StrategyConfig& config, const StrategyContext& ctx,
                           std::span<const PseudoLabel> labels) {
    config.validate();
    const auto& task = detail::task_of(ctx);
    detail::require_aligned(labels, task, "co-training");
    detail::RunBuilder run(config, ctx);
    const auto labeled = labeled_pool(task);
    const std::uint64_t seed_a = ctx.seed;
    const std::uint64_t seed_b = derive_seed(ctx.seed, kSecondModelStream);
    FitResult a = fit_model(labeled, task, ctx.model, ctx.train, seed_a);
    if (config.rounds == 0) return run.finish(std::move(a));
    FitResult b = fit_model(labeled, task, ctx.model, ctx.train, seed_b);

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        auto pool_a = labeled;
        auto pool_b = labeled;
        RoundStats stats{r, 0, 0, 0};
        std::size_t oos = 0;
        for (std::size_t i = 0; i < task.unlabeled.size(); ++i) {
            const auto& inst = task.unlabeled[i];
            if (labels[i].is_oos()) {
                ++oos;
                run.audit(r, inst, std::nullopt, 0.0, false);
                continue;
            }
            const std::size_t label = *labels[i].label;
            const bool a_agrees = predict(a.params, inst.x) == label;
            const bool b_agrees = predict(b.params, inst.x) == label;
            // Each model's pool trusts the labels its peer agrees with.
            const double w_a = b_agrees ? 1.0 : config.low_weight;
            const double w_b = a_agrees ? 1.0 : config.low_weight;
            if (w_a > 0.0) pool_a.push_back(detail::hard_example(inst.x, label, task.class_count, w_a));
            if (w_b > 0.0) pool_b.push_back(detail::hard_example(inst.x, label, task.class_count, w_b));
            const bool trusted = a_agrees || b_agrees;
            trusted ? ++stats.accepted : ++stats.rejected;
            run.audit(r, inst, label, w_a, trusted);
        }
        stats.oos = oos;
        run.add_round(stats);
        if (oos == task.unlabeled.size() && !task.unlabeled.empty()) {
            run.note("every pseudo-label was out of schema; falling back to supervised");
            return run.finish(std::move(a));
        }
        a = fit_model(pool_a, task, ctx.model, ctx.train, seed_a);
        b = fit_model(pool_b, task, ctx.model, ctx.train, seed_b);
    }
    return run.finish(a.val_macro_f1 >= b.val_macro_f1 ? std::move(a) : std::move(b));
}

}  // namespace crisis
