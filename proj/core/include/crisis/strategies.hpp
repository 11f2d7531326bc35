#pragma once

#include "crisis/metrics.hpp"
#include "crisis/model.hpp"
#include "crisis/oracle.hpp"
#include "crisis/task.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crisis {

enum class StrategyId {
    supervised,
    self_train,
    ust,
    mixmatch,
    aum_st,
    conf_st_mixup,
    aum_st_mixup,
    verify_match,
    lg_cotrain,
    sg_cotrain,
};

std::string_view to_string(StrategyId id);
std::optional<StrategyId> parse_strategy(std::string_view name);
const std::vector<StrategyId>& all_strategies();
// Strategies that consume LLM (remote or simulated) pseudo-labels.
bool uses_llm_labels(StrategyId id);

struct StrategyConfig {
    StrategyId id = StrategyId::supervised;
    std::size_t rounds = 3;
    double threshold = 0.9;           // confidence / confidence-gap cut
    double mixup_alpha = 0.75;
    double sharpen_temperature = 0.5;
    double aum_keep_percentile = 50.0;
    std::size_t uncertainty_samples = 10;
    double low_weight = 0.3;
    double accept_fraction = 0.5;     // UST: share of each class kept per round
    std::size_t guess_augmentations = 2;
    double augment_drop = 0.2;        // feature dropout used as augmentation
    std::optional<double> verify_threshold;  // fixed verification cut; default derived from D_L

    void validate() const;
};

struct RoundStats {
    std::size_t round = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t oos = 0;
};

struct AuditEntry {
    std::size_t round = 0;
    std::string example_id;
    std::optional<std::size_t> gold;
    std::optional<std::size_t> pseudo_label;
    double score = 0.0;  // strategy-specific: confidence, gap, AUM, weight
    bool accepted = false;
};

struct RunRecord {
    std::string label;  // table row name; defaults to the strategy id
    std::string event_name;
    std::size_t budget = 0;
    std::uint64_t seed = 0;
    StrategyConfig strategy;
    std::vector<RoundStats> rounds;
    std::size_t best_epoch = 0;
    MetricsReport val;
    MetricsReport test;
    double wall_seconds = 0.0;
    std::vector<std::string> notes;
};

struct StrategyResult {
    ClassifierParams params;
    RunRecord record;
    std::vector<AuditEntry> audit;
};

struct StrategyContext {
    const TaskData* task = nullptr;
    ModelConfig model;
    TrainConfig train;  // train.seed is overwritten with `seed`
    std::uint64_t seed = 0;
    std::size_t budget = 0;  // labels per class, recorded only
    std::span<const PseudoLabel> llm_labels;  // aligned with task->unlabeled
    bool record_audit = false;
};

// Result of fitting one classifier with per-epoch model selection on D_val.
struct FitResult {
    ClassifierParams params;
    double val_macro_f1 = 0.0;
    std::size_t best_epoch = 0;
    std::vector<double> loss_history;
};

/// Fresh model (init from `seed`) trained on `pool`; the epoch with the best
/// validation Macro-F1 is kept, earlier epoch on ties. Without validation data
/// the last epoch is kept.
FitResult fit_model(std::span<const TrainingExample> pool, const TaskData& task, const ModelConfig& model,
                    const TrainConfig& train, std::uint64_t seed);

std::vector<TrainingExample> labeled_pool(const TaskData& task);
std::vector<std::vector<double>> predict_probabilities(const ClassifierParams& params,
                                                       std::span<const Instance> instances);
MetricsReport evaluate(const ClassifierParams& params, std::span<const Instance> instances, const TaskData& task);

// UST selection: within each predicted class, lowest variance first (then
// higher confidence, then index); keeps ceil(fraction * n_c).
struct UncertaintyScore {
    std::size_t predicted = 0;
    double confidence = 0.0;
    double variance = 0.0;
};
std::vector<std::size_t> select_by_uncertainty(std::span<const UncertaintyScore> scores, double fraction,
                                               std::size_t class_count);

/// Area under the margin: margins of each example's assigned (argmax) label,
/// recorded after every epoch of training from `init`, then averaged.
struct AumRecord {
    std::string example_id;  // filled by callers that know the ids
    std::vector<double> margins;
    double aum = 0.0;
};
std::vector<AumRecord> track_aum(ClassifierParams init, std::span<const TrainingExample> examples,
                                 const TrainConfig& train);

// Verification cut: mean max-probability over correctly classified D_L.
double verification_threshold(const ClassifierParams& params, std::span<const Instance> labeled);

StrategyResult run_strategy(const StrategyConfig& config, const StrategyContext& ctx);

StrategyResult run_supervised(const StrategyContext& ctx);
StrategyResult run_self_training(const StrategyConfig& config, const StrategyContext& ctx);
StrategyResult run_ust(const StrategyConfig& config, const StrategyContext& ctx);
StrategyResult run_mixmatch(const StrategyConfig& config, const StrategyContext& ctx);
StrategyResult run_aum_st(const StrategyConfig& config, const StrategyContext& ctx, bool with_mixup);
StrategyResult run_conf_st_mixup(const StrategyConfig& config, const StrategyContext& ctx);
StrategyResult run_verify_match(const StrategyConfig& config, const StrategyContext& ctx);
// Co-training of two models over `labels`: LLM labels for LG-CoTrain, the
// supervised teacher's labels for SG-CoTrain.
StrategyResult run_cotrain(const StrategyConfig& config, const StrategyContext& ctx,
                           std::span<const PseudoLabel> labels);

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& json);
// `round<TAB>id<TAB>gold<TAB>pseudo<TAB>score<TAB>accepted` with a header row.
void write_audit_tsv(std::ostream& out, std::span<const AuditEntry> audit);

}  // namespace crisis
