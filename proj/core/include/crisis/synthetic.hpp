#pragma once

#include "crisis/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace crisis {

/// Bag-of-words generator for desk-scale experiments. Every class owns a
/// keyword vocabulary; a document mixes Zipf-distributed keywords of its class
/// (rate `signal_rate`) with shared background words. A share of the keyword
/// slots (`cross_signal_rate`) is drawn from another class instead.
struct SyntheticConfig {
    std::vector<std::size_t> train_counts;  // per class
    std::vector<std::size_t> val_counts;
    std::vector<std::size_t> test_counts;
    std::size_t class_vocab = 200;
    std::size_t background_vocab = 3000;
    double zipf_exponent = 0.9;
    double signal_rate = 0.3;
    double cross_signal_rate = 0.1;
    std::size_t min_tokens = 10;
    std::size_t max_tokens = 24;
    std::uint64_t seed = 0;

    void validate(std::size_t class_count) const;
};

// Largest-remainder rescaling of `profile` to `total`, with every class
// receiving at least `floor_count`.
std::vector<std::size_t> scale_counts(std::span<const std::size_t> profile, std::size_t total,
                                      std::size_t floor_count = 0);

// Flood-event imbalance (one dominant rescue/donation class, a near-empty
// missing-people class) at 5000 / 750 / 1500 examples.
SyntheticConfig flood_like_config(std::uint64_t seed = 0);

// Evenly sized classes, no background noise and no cross-class keywords.
SyntheticConfig separable_config(std::size_t class_count, std::size_t train_per_class, std::size_t val_per_class,
                                 std::size_t test_per_class, std::uint64_t seed = 0);

EventCorpus make_synthetic_corpus(const std::string& event_name, const LabelSchema& schema,
                                  const SyntheticConfig& config);

}  // namespace crisis
