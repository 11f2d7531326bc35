#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace crisis {

struct F1Report {
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;  // every class; only active ones enter the mean
    std::vector<double> precision;
    std::vector<double> recall;
};

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;  // [gold][predicted]

ConfusionMatrix confusion(std::span<const std::size_t> predictions, std::span<const std::size_t> golds,
                          std::size_t class_count);

/// Per-class F1 = 2PR/(P+R), 0 when P+R = 0. Macro = unweighted mean over
/// active_classes (all classes when empty). A listed class with no gold and
/// no predicted examples contributes 0.
F1Report macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> golds,
                  std::size_t class_count, std::span<const std::size_t> active_classes = {});

F1Report macro_f1_from_confusion(const ConfusionMatrix& counts, std::span<const std::size_t> active_classes = {});

struct ReliabilityBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double mean_confidence = 0.0;
    double accuracy = 0.0;
};

struct EceReport {
    double ece = 0.0;
    std::vector<ReliabilityBin> bins;
};

// Equal-width bins on [0,1]: [b/B, (b+1)/B), last bin closed at 1.
std::size_t ece_bin_index(double confidence, std::size_t bin_count);

EceReport expected_calibration_error(std::span<const double> confidences, std::span<const bool> correct,
                                     std::size_t bin_count = 10);

struct MetricsReport {
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
    double ece = 0.0;
    std::vector<ReliabilityBin> bins;
    ConfusionMatrix confusion;
    std::vector<std::size_t> active_classes;
    std::size_t sample_count = 0;
};

// Prediction = argmax of each row, confidence = its probability.
MetricsReport evaluate_predictions(const std::vector<std::vector<double>>& probabilities,
                                   std::span<const std::size_t> golds, std::size_t class_count,
                                   std::span<const std::size_t> active_classes, std::size_t bin_count = 10);

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& json);

// `lower<TAB>upper<TAB>count<TAB>mean_confidence<TAB>accuracy` with a header row.
void write_reliability_tsv(std::ostream& out, const MetricsReport& report);

}  // namespace crisis
