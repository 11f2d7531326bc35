#include "crisis/metrics.hpp"

#include "crisis/error.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>

namespace crisis {

ConfusionMatrix confusion(std::span<const std::size_t> predictions, std::span<const std::size_t> golds,
                          std::size_t class_count) {
    if (predictions.size() != golds.size()) throw Error("confusion: predictions and golds differ in length");
    ConfusionMatrix m(class_count, std::vector<std::size_t>(class_count, 0));
    for (std::size_t i = 0; i < golds.size(); ++i) {
        if (golds[i] >= class_count || predictions[i] >= class_count)
            throw std::out_of_range("confusion: class index out of range");
        ++m[golds[i]][predictions[i]];
    }
    return m;
}

F1Report macro_f1_from_confusion(const ConfusionMatrix& counts, std::span<const std::size_t> active_classes) {
    const std::size_t k = counts.size();
    F1Report r;
    r.per_class_f1.assign(k, 0.0);
    r.precision.assign(k, 0.0);
    r.recall.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const double tp = static_cast<double>(counts[c][c]);
        double gold_total = 0.0, pred_total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            gold_total += static_cast<double>(counts[c][j]);
            pred_total += static_cast<double>(counts[j][c]);
        }
        const double p = pred_total > 0.0 ? tp / pred_total : 0.0;
        const double rc = gold_total > 0.0 ? tp / gold_total : 0.0;
        r.precision[c] = p;
        r.recall[c] = rc;
        r.per_class_f1[c] = (p + rc) > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0;
    }
    std::vector<std::size_t> all;
    if (active_classes.empty()) {
        all.resize(k);
        std::iota(all.begin(), all.end(), std::size_t{0});
        active_classes = all;
    }
    double sum = 0.0;
    for (auto c : active_classes) {
        if (c >= k) throw std::out_of_range("macro_f1: active class out of range");
        sum += r.per_class_f1[c];
    }
    r.macro_f1 = sum / static_cast<double>(active_classes.size());
    return r;
}

F1Report macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> golds,
                  std::size_t class_count, std::span<const std::size_t> active_classes) {
    if (golds.empty()) throw Error("macro_f1: empty input");
    return macro_f1_from_confusion(confusion(predictions, golds, class_count), active_classes);
}

std::size_t ece_bin_index(double confidence, std::size_t bin_count) {
    const double b = static_cast<double>(bin_count);
    auto idx = static_cast<std::size_t>(std::floor(confidence * b));
    if (idx >= bin_count) idx = bin_count - 1;
    // Settle rounding at the edges against the stated bin boundaries.
    if (idx + 1 < bin_count && confidence >= static_cast<double>(idx + 1) / b) ++idx;
    if (idx > 0 && confidence < static_cast<double>(idx) / b) --idx;
    return idx;
}

EceReport expected_calibration_error(std::span<const double> confidences, std::span<const bool> correct,
                                     std::size_t bin_count) {
    if (confidences.empty()) throw Error("ece: empty input");
    if (confidences.size() != correct.size()) throw Error("ece: confidences and correctness differ in length");
    if (bin_count < 1) throw Error("ece: bin_count must be >= 1");

    std::vector<double> conf_sum(bin_count, 0.0), hits(bin_count, 0.0);
    std::vector<std::size_t> counts(bin_count, 0);
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        const double c = confidences[i];
        if (!(c >= 0.0 && c <= 1.0)) throw Error("ece: confidence outside [0,1]");
        const auto b = ece_bin_index(c, bin_count);
        ++counts[b];
        conf_sum[b] += c;
        hits[b] += correct[i] ? 1.0 : 0.0;
    }
    EceReport r;
    const double n = static_cast<double>(confidences.size());
    for (std::size_t b = 0; b < bin_count; ++b) {
        ReliabilityBin bin;
        bin.lower = static_cast<double>(b) / static_cast<double>(bin_count);
        bin.upper = static_cast<double>(b + 1) / static_cast<double>(bin_count);
        bin.count = counts[b];
        if (counts[b]) {
            const double cnt = static_cast<double>(counts[b]);
            bin.mean_confidence = conf_sum[b] / cnt;
            bin.accuracy = hits[b] / cnt;
            r.ece += (cnt / n) * std::abs(bin.mean_confidence - bin.accuracy);
        }
        r.bins.push_back(bin);
    }
    return r;
}

MetricsReport evaluate_predictions(const std::vector<std::vector<double>>& probabilities,
                                   std::span<const std::size_t> golds, std::size_t class_count,
                                   std::span<const std::size_t> active_classes, std::size_t bin_count) {
    if (probabilities.size() != golds.size()) throw Error("evaluate: probabilities and golds differ in length");
    std::vector<std::size_t> preds(golds.size());
    std::vector<double> conf(golds.size());
    auto correct = std::make_unique<bool[]>(golds.size());
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const auto& p = probabilities[i];
        const auto it = std::max_element(p.begin(), p.end());
        preds[i] = static_cast<std::size_t>(it - p.begin());
        conf[i] = std::clamp(*it, 0.0, 1.0);
        correct[i] = preds[i] == golds[i];
    }

    MetricsReport r;
    r.confusion = confusion(preds, golds, class_count);
    const auto f1 = macro_f1_from_confusion(r.confusion, active_classes);
    r.macro_f1 = f1.macro_f1;
    r.per_class_f1 = f1.per_class_f1;
    const auto e = expected_calibration_error(conf, std::span<const bool>(correct.get(), golds.size()), bin_count);
    r.ece = e.ece;
    r.bins = e.bins;
    r.active_classes.assign(active_classes.begin(), active_classes.end());
    r.sample_count = golds.size();
    return r;
}

nlohmann::json to_json_value(const MetricsReport& r) {
    nlohmann::json j;
    j["macro_f1"] = r.macro_f1;
    j["per_class_f1"] = r.per_class_f1;
    j["ece"] = r.ece;
    j["sample_count"] = r.sample_count;
    j["active_classes"] = r.active_classes;
    j["confusion"] = r.confusion;
    auto& bins = j["bins"] = nlohmann::json::array();
    for (const auto& b : r.bins) {
        bins.push_back({{"lower", b.lower},
                        {"upper", b.upper},
                        {"count", b.count},
                        {"mean_confidence", b.mean_confidence},
                        {"accuracy", b.accuracy}});
    }
    return j;
}

MetricsReport metrics_from_json_value(const nlohmann::json& j) {
    MetricsReport r;
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.per_class_f1 = j.at("per_class_f1").get<std::vector<double>>();
    r.ece = j.at("ece").get<double>();
    r.sample_count = j.value("sample_count", std::size_t{0});
    r.active_classes = j.value("active_classes", std::vector<std::size_t>{});
    r.confusion = j.value("confusion", ConfusionMatrix{});
    for (const auto& b : j.value("bins", nlohmann::json::array())) {
        r.bins.push_back({b.at("lower").get<double>(), b.at("upper").get<double>(), b.at("count").get<std::size_t>(),
                          b.at("mean_confidence").get<double>(), b.at("accuracy").get<double>()});
    }
    return r;
}

std::string metrics_to_json(const MetricsReport& report) { return to_json_value(report).dump(2); }

MetricsReport metrics_from_json(const std::string& json) {
    try {
        return metrics_from_json_value(nlohmann::json::parse(json));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metrics json: ") + e.what());
    }
}

void write_reliability_tsv(std::ostream& out, const MetricsReport& report) {
    out << "lower\tupper\tcount\tmean_confidence\taccuracy\n";
    for (const auto& b : report.bins) {
        out << b.lower << '\t' << b.upper << '\t' << b.count << '\t' << b.mean_confidence << '\t' << b.accuracy
            << '\n';
    }
}

}  // namespace crisis
