#pragma once

#include "crisis/model.hpp"
#include "crisis/task.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crisis {

enum class LabelSource { teacher, remote, simulated };

std::string_view to_string(LabelSource source);

/// A label proposed for one unlabeled example. An empty `label` marks an
/// out-of-schema (OOS) response; every strategy drops those.
struct PseudoLabel {
    std::string example_id;
    std::optional<std::size_t> label;
    double confidence = 1.0;
    LabelSource source = LabelSource::simulated;
    std::optional<std::string> raw_response;

    bool is_oos() const noexcept { return !label.has_value(); }
};

/// Teacher: argmax of the classifier (lowest index on ties), confidence = max prob.
std::vector<PseudoLabel> annotate_teacher(const ClassifierParams& params, std::span<const Instance> unlabeled);

/// Per-class probability that the simulator returns the gold label.
struct OracleProfile {
    std::vector<double> per_class_accuracy;
    std::uint64_t seed = 0;

    void validate(std::size_t class_count) const;
};

/// Zero-shot LLM quality per HumAID class (per-class F1 used as accuracy),
/// in humaid_schema() order.
OracleProfile humaid_llm_profile(std::uint64_t seed = 0);

OracleProfile uniform_profile(std::size_t class_count, double accuracy, std::uint64_t seed = 0);

/// For gold class c, emits c with probability per_class_accuracy[c] and
/// otherwise a uniformly drawn different class. Each example's draw depends
/// only on (example id, profile seed).
std::vector<PseudoLabel> annotate_simulated(std::span<const Instance> examples, const OracleProfile& profile,
                                            std::size_t class_count);

// Aligns pseudo-labels to `unlabeled` by id. Missing ids come back as OOS.
std::vector<PseudoLabel> align_pseudo_labels(std::span<const Instance> unlabeled,
                                             std::span<const PseudoLabel> labels);

// Fraction of non-OOS pseudo-labels that match gold. Instances lacking gold are skipped.
double pseudo_label_accuracy(std::span<const Instance> unlabeled, std::span<const PseudoLabel> aligned);

}  // namespace crisis
