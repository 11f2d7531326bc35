#include "crisis/oracle.hpp"

#include "crisis/error.hpp"
#include "crisis/rng.hpp"

#include <algorithm>
#include <unordered_map>

namespace crisis {

std::string_view to_string(LabelSource source) {
    switch (source) {
        case LabelSource::teacher: return "teacher";
        case LabelSource::remote: return "remote";
        case LabelSource::simulated: return "simulated";
    }
    return "unknown";
}

std::vector<PseudoLabel> annotate_teacher(const ClassifierParams& params, std::span<const Instance> unlabeled) {
    std::vector<PseudoLabel> out;
    out.reserve(unlabeled.size());
    for (const auto& inst : unlabeled) {
        const auto fwd = forward(params, inst.x);
        const auto label = fwd.probs.argmax();
        out.push_back({inst.id, label, fwd.probs.probs[label], LabelSource::teacher, std::nullopt});
    }
    return out;
}

void OracleProfile::validate(std::size_t class_count) const {
    if (per_class_accuracy.size() != class_count)
        throw ConfigError("oracle profile covers " + std::to_string(per_class_accuracy.size()) +
                          " classes, schema has " + std::to_string(class_count));
    for (double a : per_class_accuracy) {
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("oracle accuracy entries must lie in [0,1]");
    }
}

OracleProfile humaid_llm_profile(std::uint64_t seed) {
    return OracleProfile{{
                             0.634,  // Caution and advice
                             0.739,  // Sympathy and support
                             0.526,  // Requests or urgent needs
                             0.766,  // Displaced people and evacuations
                             0.885,  // Injured or dead people
                             0.698,  // Missing or found people
                             0.704,  // Infrastructure and utility damage
                             0.827,  // Rescue, volunteering, or donation effort
                             0.276,  // Other relevant information
                             0.569,  // Not humanitarian
                         },
                         seed};
}

OracleProfile uniform_profile(std::size_t class_count, double accuracy, std::uint64_t seed) {
    return OracleProfile{std::vector<double>(class_count, accuracy), seed};
}

std::vector<PseudoLabel> annotate_simulated(std::span<const Instance> examples, const OracleProfile& profile,
                                            std::size_t class_count) {
    if (class_count < 2) throw ConfigError("simulated oracle needs at least 2 classes");
    profile.validate(class_count);
    std::vector<PseudoLabel> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        if (!ex.gold) throw Error("simulated oracle: example '" + ex.id + "' has no gold label");
        const std::size_t gold = *ex.gold;
        Rng rng(derive_seed(profile.seed, fnv1a64(ex.id)));
        std::size_t label = gold;
        if (!(rng.uniform() < profile.per_class_accuracy.at(gold))) {
            label = static_cast<std::size_t>(rng.below(class_count - 1));
            if (label >= gold) ++label;
        }
        out.push_back({ex.id, label, 1.0, LabelSource::simulated, std::nullopt});
    }
    return out;
}

std::vector<PseudoLabel> align_pseudo_labels(std::span<const Instance> unlabeled, std::span<const PseudoLabel> labels) {
    std::unordered_map<std::string_view, const PseudoLabel*> by_id;
    for (const auto& pl : labels) by_id[pl.example_id] = &pl;
    std::vector<PseudoLabel> out;
    out.reserve(unlabeled.size());
    for (const auto& inst : unlabeled) {
        const auto it = by_id.find(inst.id);
        if (it != by_id.end()) {
            out.push_back(*it->second);
        } else {
            out.push_back({inst.id, std::nullopt, 0.0, LabelSource::remote, std::nullopt});
        }
    }
    return out;
}

double pseudo_label_accuracy(std::span<const Instance> unlabeled, std::span<const PseudoLabel> aligned) {
    std::size_t n = 0, hit = 0;
    for (std::size_t i = 0; i < unlabeled.size() && i < aligned.size(); ++i) {
        if (aligned[i].is_oos() || !unlabeled[i].gold) continue;
        ++n;
        hit += *aligned[i].label == *unlabeled[i].gold;
    }
    return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

}  // namespace crisis
