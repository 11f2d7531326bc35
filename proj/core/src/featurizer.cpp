#include "crisis/featurizer.hpp"

#include "crisis/error.hpp"
#include "crisis/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace crisis {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char c = s[i];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c != prefix[i]) return false;
    }
    return true;
}

void tokenize_chunk(std::string_view chunk, const FeaturizerConfig& config, std::vector<std::string>& out) {
    if (config.normalize_urls_users) {
        if (chunk == kUrlToken || chunk == kUserToken) {
            out.emplace_back(chunk);
            return;
        }
        if (starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") || starts_with_ci(chunk, "www.")) {
            out.emplace_back(kUrlToken);
            return;
        }
    }
    std::string word;
    auto flush = [&] {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
    };
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        const auto c = static_cast<unsigned char>(chunk[i]);
        if (c == '@' && config.normalize_urls_users && i + 1 < chunk.size() &&
            is_word_byte(static_cast<unsigned char>(chunk[i + 1]))) {
            flush();
            out.emplace_back(kUserToken);
            while (i + 1 < chunk.size() && is_word_byte(static_cast<unsigned char>(chunk[i + 1]))) ++i;
            continue;
        }
        if (is_word_byte(c)) {
            word.push_back(config.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                                                    : static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
}

}  // namespace

double SparseVector::norm() const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * w;
    return std::sqrt(s);
}

double SparseVector::dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * dense[i];
    return s;
}

void FeaturizerConfig::validate() const {
    if (dim < (std::size_t{1} << 10) || (dim & (dim - 1)) != 0)
        throw ConfigError("featurizer dim must be a power of two >= 1024");
    if (dim > (std::size_t{1} << 32)) throw ConfigError("featurizer dim must fit in 32 bits");
    if (ngram_orders.empty()) throw ConfigError("featurizer needs at least one n-gram order");
    for (int n : ngram_orders) {
        if (n < 1 || n > 3) throw ConfigError("n-gram orders must be in {1,2,3}");
    }
}

std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& config) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokenize_chunk(text.substr(start, i - start), config, tokens);
    }
    return tokens;
}

std::uint32_t ngram_bucket(std::string_view ngram, std::size_t dim) {
    return static_cast<std::uint32_t>(fnv1a64(ngram) % dim);
}

SparseVector hash_counts(const std::vector<std::string>& tokens, const FeaturizerConfig& config) {
    std::map<std::uint32_t, double> counts;
    std::string gram;
    for (int order : config.ngram_orders) {
        const auto n = static_cast<std::size_t>(order);
        if (tokens.size() < n) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            gram.clear();
            for (std::size_t k = 0; k < n; ++k) {
                if (k) gram.push_back(' ');
                gram += tokens[i + k];
            }
            counts[ngram_bucket(gram, config.dim)] += 1.0;
        }
    }
    SparseVector v;
    v.dim = config.dim;
    v.entries.assign(counts.begin(), counts.end());
    return v;
}

FeatureVector featurize(const std::vector<std::string>& tokens, const FeaturizerConfig& config) {
    auto v = hash_counts(tokens, config);
    const double n = v.norm();
    if (n > 0.0) {
        for (auto& e : v.entries) e.second /= n;
    }
    return v;
}

void write_feature_dump(std::ostream& out, std::string_view id, const FeatureVector& v) {
    out << id << '\t';
    bool first = true;
    for (const auto& [i, w] : v.entries) {
        if (!first) out << ',';
        first = false;
        out << i << ':' << w;
    }
    out << '\n';
}

}  // namespace crisis
