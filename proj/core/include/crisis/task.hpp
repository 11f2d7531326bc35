#pragma once

#include "crisis/corpus.hpp"
#include "crisis/featurizer.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace crisis {

struct Instance {
    std::string id;
    std::string text;
    FeatureVector x;
    std::optional<std::size_t> gold;
};

/// Featurized view of one (event, split) pair, which is what strategies consume.
/// Unlabeled instances keep their gold labels only for auditing and for the
/// simulated oracle; strategies never read them.
struct TaskData {
    std::string event_name;
    std::size_t class_count = 0;
    std::vector<std::size_t> active_classes;
    std::vector<Instance> labeled;
    std::vector<Instance> unlabeled;
    std::vector<Instance> val;
    std::vector<Instance> test;
};

Instance make_instance(const Example& ex, const FeaturizerConfig& config);

// Val/test examples whose gold label falls outside the active classes are kept;
// they still count in metrics as errors against an inactive class.
TaskData build_task(const EventCorpus& corpus, const SplitPlan& plan, const FeaturizerConfig& config);

}  // namespace crisis
