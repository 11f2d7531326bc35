#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crisis {

std::string sha256_hex(std::string_view data);

struct CacheKey {
    std::string model;
    std::string prompt_digest;
    std::string text_digest;

    static CacheKey make(std::string_view model, std::string_view prompt, std::string_view text);
    bool operator==(const CacheKey&) const = default;
};

/// Append-only store of remote responses, one JSON record per line:
///   {"model":..,"prompt_digest":..,"text_digest":..,"response":..,"timestamp":..}
/// Lookups return the last record written for a key. Lines that fail to parse
/// are skipped and reported through warnings(). Thread-safe; writes are
/// serialized through one handle.
class AnnotationCache {
public:
    explicit AnnotationCache(std::filesystem::path path);

    std::optional<std::string> get(const CacheKey& key) const;
    void put(const CacheKey& key, const std::string& response);

    std::size_t size() const;
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    static std::string flat_key(const CacheKey& key);

    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> entries_;
    std::vector<std::string> warnings_;
    std::ofstream out_;
};

}  // namespace crisis
