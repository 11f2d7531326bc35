#pragma once

#include "crisis/annotation_cache.hpp"
#include "crisis/corpus.hpp"
#include "crisis/featurizer.hpp"
#include "crisis/model.hpp"
#include "crisis/oracle.hpp"
#include "crisis/strategies.hpp"
#include "crisis/synthetic.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crisis {

/// One event of the grid: either TSV files or a generated corpus.
struct EventSource {
    std::string name;
    std::optional<std::filesystem::path> train;
    std::optional<std::filesystem::path> val;
    std::optional<std::filesystem::path> test;
    std::optional<SyntheticConfig> synthetic;
};

enum class OracleKind { teacher, remote, simulated };
std::string_view to_string(OracleKind kind);
std::optional<OracleKind> parse_oracle_kind(std::string_view name);

struct OracleSettings {
    OracleKind kind = OracleKind::simulated;
    // Simulated: "humaid" per-class profile, or "uniform" at uniform_accuracy.
    std::string profile = "humaid";
    double uniform_accuracy = 0.7;
    std::vector<double> per_class_accuracy;  // overrides `profile` when set
    std::uint64_t seed = 0;
    // Remote.
    std::string endpoint;
    std::string model = "gpt-4o";
    std::string prompt_template;
    std::string token_env = "CRISIS_SSL_API_TOKEN";
    std::size_t max_retries = 3;
    double rate_limit = 5.0;
    std::size_t concurrency = 4;
    std::optional<std::filesystem::path> cache;  // default: <output>/annotation_cache.jsonl
};

struct NamedStrategy {
    std::string label;
    StrategyConfig config;
};

struct ExperimentConfig {
    std::vector<std::string> categories;  // label schema; empty means the HumAID categories
    std::vector<EventSource> events;
    std::vector<std::size_t> budgets{5, 10, 25, 50};
    std::vector<NamedStrategy> strategies;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    OracleSettings oracle;
    FeaturizerConfig featurizer;
    ModelConfig model;
    TrainConfig train;
    std::filesystem::path output_dir = "runs";
    std::size_t workers = 1;
    bool write_audit = false;

    LabelSchema schema() const;
    // Checks ranges and that referenced files exist.
    void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& json, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct RunKey {
    std::string event;
    std::size_t budget = 0;
    std::string strategy;  // NamedStrategy::label
    std::uint64_t seed = 0;

    std::string id() const;  // event/k<budget>/<strategy>/seed<seed>
    bool operator==(const RunKey&) const = default;
};

struct RunOutcome {
    RunKey key;
    std::optional<RunRecord> record;
    std::string error;     // set when the run failed
    bool resumed = false;  // loaded from an earlier execution
};

struct ExperimentResult {
    std::vector<RunOutcome> runs;  // grid order: event, budget, seed, strategy
    std::size_t failures() const;
    std::vector<RunRecord> records() const;
};

using ProgressFn = std::function<void(const RunOutcome&)>;

/// Executes the grid. Finished runs are written to
/// <output>/runs/<key id>.json and listed in <output>/manifest.jsonl; runs the
/// manifest marks as done are loaded instead of re-executed. A failing run is
/// recorded and the grid continues.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Pseudo-labels for `task.unlabeled` from the configured oracle, aligned by
/// position. The teacher oracle trains the supervised model first. The remote
/// oracle uses `cache` when given, else opens the configured cache file.
std::vector<PseudoLabel> oracle_labels(const OracleSettings& oracle, const TaskData& task, const LabelSchema& schema,
                                       const ExperimentConfig& config, std::uint64_t seed,
                                       AnnotationCache* cache = nullptr);

// Records of every run the manifest under `output_dir` lists as finished.
std::vector<RunRecord> load_run_records(const std::filesystem::path& output_dir);

OracleProfile make_profile(const OracleSettings& oracle, std::size_t class_count);

EventCorpus load_event_source(const EventSource& source, const LabelSchema& schema);

}  // namespace crisis
