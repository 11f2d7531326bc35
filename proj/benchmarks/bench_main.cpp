#include "crisis/corpus.hpp"
#include "crisis/featurizer.hpp"
#include "crisis/metrics.hpp"
#include "crisis/model.hpp"
#include "crisis/rng.hpp"
#include "crisis/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace crisis;

const EventCorpus& corpus() {
    static const EventCorpus c = make_synthetic_corpus("bench", humaid_schema(), flood_like_config(0));
    return c;
}

std::vector<TrainingExample> examples(const FeaturizerConfig& fc, std::size_t n) {
    std::vector<TrainingExample> out;
    const auto& c = corpus();
    for (std::size_t i = 0; i < n && i < c.train.size(); ++i) {
        out.push_back({featurize_text(c.train[i].text, fc),
                       LabelDistribution::one_hot(*c.train[i].gold_label, c.schema.size()), 1.0});
    }
    return out;
}

void BM_Featurize(benchmark::State& state) {
    const FeaturizerConfig fc;
    const auto& train = corpus().train;
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(featurize_text(train[i].text, fc));
        i = (i + 1) % train.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Featurize);

void BM_TrainStep(benchmark::State& state) {
    const FeaturizerConfig fc;
    const auto batch = examples(fc, 32);
    const auto hidden = static_cast<std::size_t>(state.range(0));
    Trainer trainer(init_params(fc.dim, hidden, corpus().schema.size(), 1, 0.1), TrainConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(trainer.step(batch));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(64);

void BM_MacroF1(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    std::vector<std::size_t> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
        pred[i] = rng.below(10);
        gold[i] = rng.below(10);
    }
    for (auto _ : state) benchmark::DoNotOptimize(macro_f1(pred, gold, 10));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_MacroF1)->Arg(1500)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
