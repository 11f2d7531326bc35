#include "crisis/task.hpp"

namespace crisis {

Instance make_instance(const Example& ex, const FeaturizerConfig& config) {
    return Instance{ex.id, ex.text, featurize_text(ex.text, config), ex.gold_label};
}

TaskData build_task(const EventCorpus& corpus, const SplitPlan& plan, const FeaturizerConfig& config) {
    config.validate();
    TaskData task;
    task.event_name = corpus.event_name;
    task.class_count = corpus.schema.size();
    task.active_classes = corpus.active_classes();
    for (auto i : plan.labeled) task.labeled.push_back(make_instance(corpus.train.at(i), config));
    for (auto i : plan.unlabeled) task.unlabeled.push_back(make_instance(corpus.train.at(i), config));
    for (const auto& ex : corpus.val) {
        if (ex.gold_label) task.val.push_back(make_instance(ex, config));
    }
    for (const auto& ex : corpus.test) {
        if (ex.gold_label) task.test.push_back(make_instance(ex, config));
    }
    return task;
}

}  // namespace crisis
