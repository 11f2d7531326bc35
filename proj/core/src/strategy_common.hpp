#pragma once

#include "crisis/strategies.hpp"

#include <chrono>
#include <span>
#include <vector>

namespace crisis::detail {

const TaskData& task_of(const StrategyContext& ctx);

TrainingExample hard_example(const FeatureVector& x, std::size_t label, std::size_t class_count, double weight);

// Appends one mixed example per anchor, each paired with a uniformly drawn
// partner. Nothing is appended when weight is zero or partners is empty.
void append_mixed(std::vector<TrainingExample>& pool, std::span<const TrainingExample> anchors,
                  std::span<const TrainingExample> partners, double alpha, double weight, Rng& rng);

// Pseudo-labels must line up with D_U.
void require_aligned(std::span<const PseudoLabel> labels, const TaskData& task, const char* who);

class RunBuilder {
public:
    RunBuilder(const StrategyConfig& config, const StrategyContext& ctx);

    void add_round(RoundStats stats) { record_.rounds.push_back(stats); }
    void note(std::string text) { record_.notes.push_back(std::move(text)); }
    void audit(std::size_t round, const Instance& inst, std::optional<std::size_t> pseudo, double score,
               bool accepted);

    StrategyResult finish(FitResult fit);

private:
    const StrategyContext& ctx_;
    RunRecord record_;
    std::vector<AuditEntry> audit_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace crisis::detail
