#include "crisis/annotation_cache.hpp"

#include "crisis/error.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace crisis {

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

CacheKey CacheKey::make(std::string_view model, std::string_view prompt, std::string_view text) {
    return CacheKey{std::string(model), sha256_hex(prompt), sha256_hex(text)};
}

std::string AnnotationCache::flat_key(const CacheKey& key) {
    std::string k;
    k.reserve(key.model.size() + key.prompt_digest.size() + key.text_digest.size() + 2);
    k += key.model;
    k += '\x1f';
    k += key.prompt_digest;
    k += '\x1f';
    k += key.text_digest;
    return k;
}

AnnotationCache::AnnotationCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    {
        std::ifstream in(path_);
        std::string line;
        std::size_t line_no = 0;
        while (in && std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                CacheKey key{j.at("model").get<std::string>(), j.at("prompt_digest").get<std::string>(),
                             j.at("text_digest").get<std::string>()};
                entries_[flat_key(key)] = j.at("response").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                warnings_.push_back(path_.string() + ":" + std::to_string(line_no) + ": skipped corrupt cache line (" +
                                    e.what() + ")");
            }
        }
    }
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) throw Error("cannot open annotation cache " + path_.string());
}

std::optional<std::string> AnnotationCache::get(const CacheKey& key) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(flat_key(key));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void AnnotationCache::put(const CacheKey& key, const std::string& response) {
    nlohmann::json j{{"model", key.model},
                     {"prompt_digest", key.prompt_digest},
                     {"text_digest", key.text_digest},
                     {"response", response},
                     {"timestamp", utc_timestamp()}};
    const auto line = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
    out_.flush();
    entries_[flat_key(key)] = response;
}

std::size_t AnnotationCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

}  // namespace crisis
