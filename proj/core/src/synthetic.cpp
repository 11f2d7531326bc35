#include "crisis/synthetic.hpp"

#include "crisis/error.hpp"
#include "crisis/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace crisis {

namespace {

constexpr std::size_t kFloodProfile[] = {97, 585, 413, 39, 254, 0, 207, 3005, 669, 319};
constexpr std::size_t kFloodFloor = 20;

class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
            cdf_[i] = s;
        }
        for (auto& c : cdf_) c /= s;
    }

    std::size_t operator()(Rng& rng) const {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

private:
    std::vector<double> cdf_;
};

std::string keyword(std::size_t cls, std::size_t j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "k%zux%zu", cls, j);
    return buf;
}

std::string background(std::size_t j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "w%zu", j);
    return buf;
}

}  // namespace

void SyntheticConfig::validate(std::size_t class_count) const {
    if (train_counts.size() != class_count || val_counts.size() != class_count || test_counts.size() != class_count)
        throw ConfigError("synthetic class counts must have one entry per class");
    if (class_vocab == 0) throw ConfigError("synthetic class vocabulary is empty");
    if (background_vocab == 0 && signal_rate < 1.0) throw ConfigError("synthetic background vocabulary is empty");
    if (!(signal_rate >= 0.0 && signal_rate <= 1.0)) throw ConfigError("signal rate must lie in [0,1]");
    if (!(cross_signal_rate >= 0.0 && cross_signal_rate <= 1.0))
        throw ConfigError("cross-signal rate must lie in [0,1]");
    if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf exponent must be >= 0");
    if (min_tokens == 0 || max_tokens < min_tokens) throw ConfigError("bad synthetic document length range");
}

std::vector<std::size_t> scale_counts(std::span<const std::size_t> profile, std::size_t total,
                                      std::size_t floor_count) {
    const std::size_t k = profile.size();
    if (k == 0) return {};
    if (floor_count * k > total) throw ConfigError("count floor exceeds total");
    const double sum = static_cast<double>(std::accumulate(profile.begin(), profile.end(), std::size_t{0}));
    if (sum == 0.0) throw ConfigError("class profile is all zero");

    std::vector<std::size_t> out(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = static_cast<double>(profile[c]) / sum * static_cast<double>(total);
        out[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - static_cast<double>(out[c]);
        assigned += out[c];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++out[order[i % k]];

    // Lift classes below the floor, taking the difference from the largest class.
    for (std::size_t c = 0; c < k; ++c) {
        while (out[c] < floor_count) {
            const auto big = static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
            --out[big];
            ++out[c];
        }
    }
    return out;
}

SyntheticConfig flood_like_config(std::uint64_t seed) {
    SyntheticConfig c;
    c.train_counts = scale_counts(kFloodProfile, 5000, kFloodFloor);
    c.val_counts = scale_counts(kFloodProfile, 750, kFloodFloor / 4);
    c.test_counts = scale_counts(kFloodProfile, 1500, kFloodFloor / 2);
    c.seed = seed;
    return c;
}

SyntheticConfig separable_config(std::size_t class_count, std::size_t train_per_class, std::size_t val_per_class,
                                 std::size_t test_per_class, std::uint64_t seed) {
    SyntheticConfig c;
    c.train_counts.assign(class_count, train_per_class);
    c.val_counts.assign(class_count, val_per_class);
    c.test_counts.assign(class_count, test_per_class);
    c.class_vocab = 20;
    c.zipf_exponent = 0.0;
    c.signal_rate = 1.0;
    c.cross_signal_rate = 0.0;
    c.min_tokens = 6;
    c.max_tokens = 10;
    c.seed = seed;
    return c;
}

EventCorpus make_synthetic_corpus(const std::string& event_name, const LabelSchema& schema,
                                  const SyntheticConfig& config) {
    const std::size_t k = schema.size();
    config.validate(k);
    const ZipfSampler class_words(config.class_vocab, config.zipf_exponent);
    const ZipfSampler background_words(std::max<std::size_t>(config.background_vocab, 1), config.zipf_exponent);

    auto make_split = [&](const std::vector<std::size_t>& counts, const char* split, std::uint64_t stream) {
        Rng rng(derive_seed(config.seed, stream));
        std::vector<std::size_t> labels;
        for (std::size_t c = 0; c < k; ++c) labels.insert(labels.end(), counts[c], c);
        rng.shuffle(labels.begin(), labels.end());

        std::vector<Example> out;
        out.reserve(labels.size());
        char id[64];
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const std::size_t cls = labels[i];
            const std::size_t len = config.min_tokens + rng.below(config.max_tokens - config.min_tokens + 1);
            std::string text;
            for (std::size_t t = 0; t < len; ++t) {
                if (!text.empty()) text += ' ';
                if (rng.bernoulli(config.signal_rate)) {
                    std::size_t source = cls;
                    if (k > 1 && rng.bernoulli(config.cross_signal_rate)) {
                        source = rng.below(k - 1);
                        if (source >= cls) ++source;
                    }
                    text += keyword(source, class_words(rng));
                } else {
                    text += background(background_words(rng));
                }
            }
            std::snprintf(id, sizeof id, "%s-%s-%06zu", event_name.c_str(), split, i);
            out.push_back(Example{id, std::move(text), cls});
        }
        return out;
    };

    return make_event(event_name, schema, make_split(config.train_counts, "train", 1),
                      make_split(config.val_counts, "val", 2), make_split(config.test_counts, "test", 3));
}

}  // namespace crisis
