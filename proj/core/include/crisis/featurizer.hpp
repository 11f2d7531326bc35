#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crisis {

/// Sparse vector with entries sorted by index and no stored zeros.
/// Featurizer output is additionally unit-norm (or empty); vectors built by
/// mixup are convex combinations and may have norm below one.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;

    double norm() const;
    double dot(std::span<const double> dense) const;
    bool operator==(const SparseVector&) const = default;
};

using FeatureVector = SparseVector;

struct FeaturizerConfig {
    std::size_t dim = std::size_t{1} << 16;
    std::vector<int> ngram_orders{1, 2};
    bool lowercase = true;
    bool normalize_urls_users = true;

    // Throws ConfigError unless dim is a power of two >= 2^10 and orders are in {1,2,3}.
    void validate() const;
};

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

/// Splits on whitespace and punctuation. With normalize_urls_users, URLs
/// become `<url>` and @-mentions `<user>`; hashtags always lose the `#`.
/// Non-ASCII bytes are treated as word characters.
std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& config);

// FNV-1a 64 of the n-gram (tokens joined by single spaces) modulo dim.
std::uint32_t ngram_bucket(std::string_view ngram, std::size_t dim);

// Un-normalized bucket counts, sorted by index.
SparseVector hash_counts(const std::vector<std::string>& tokens, const FeaturizerConfig& config);

// hash_counts followed by L2 normalization.
FeatureVector featurize(const std::vector<std::string>& tokens, const FeaturizerConfig& config);

inline FeatureVector featurize_text(std::string_view text, const FeaturizerConfig& config) {
    return featurize(tokenize(text, config), config);
}

// Debug dump: `id<TAB>index:weight,...` per line.
void write_feature_dump(std::ostream& out, std::string_view id, const FeatureVector& v);

}  // namespace crisis
