#include "crisis/remote_annotator.hpp"

#include "crisis/error.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace crisis {

namespace {

const std::map<std::string, std::string>& humaid_definitions() {
    static const std::map<std::string, std::string> defs{
        {"Caution and advice", "warnings, advisories, or safety tips about the disaster"},
        {"Sympathy and support", "prayers, thoughts, and emotional support for those affected"},
        {"Requests or urgent needs", "calls for food, water, shelter, supplies, or other urgent help"},
        {"Displaced people and evacuations", "people relocated, evacuated, or sheltering away from home"},
        {"Injured or dead people", "reports of injuries, casualties, or deaths"},
        {"Missing or found people", "people reported missing, trapped, or found"},
        {"Infrastructure and utility damage", "damage to buildings, roads, bridges, power, or utilities"},
        {"Rescue, volunteering, or donation effort", "rescue operations, volunteering, or donations of money and goods"},
        {"Other relevant information", "other disaster-related information not covered above"},
        {"Not humanitarian", "unrelated to the disaster or of no humanitarian use"},
    };
    return defs;
}

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

class RateLimiter {
public:
    explicit RateLimiter(double per_second)
        : interval_(per_second > 0.0 ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                           std::chrono::duration<double>(1.0 / per_second))
                                     : std::chrono::steady_clock::duration::zero()),
          next_(std::chrono::steady_clock::now()) {}

    void acquire() {
        if (interval_ == std::chrono::steady_clock::duration::zero()) return;
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard lock(mutex_);
            const auto now = std::chrono::steady_clock::now();
            slot = std::max(now, next_);
            next_ = slot + interval_;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_;
    std::mutex mutex_;
};

}  // namespace

void AnnotationRequest::validate() const {
    if (batch.empty()) throw ConfigError("annotation batch is empty");
    if (endpoint.empty()) throw ConfigError("annotation endpoint is empty");
    if (model.empty()) throw ConfigError("annotation model id is empty");
    if (concurrency < 1) throw ConfigError("annotation concurrency must be >= 1");
}

std::string default_prompt_template() {
    return "You label social media posts written during disasters. Choose exactly one category for the "
           "post from this list:\n{categories}\nAnswer with the category name only, copied exactly, and "
           "nothing else.";
}

std::string render_prompt(const std::string& prompt_template, const LabelSchema& schema) {
    std::string cats;
    const auto& defs = humaid_definitions();
    for (const auto& name : schema.categories()) {
        cats += "- " + name;
        if (const auto it = defs.find(name); it != defs.end()) cats += ": " + it->second;
        cats += '\n';
    }
    if (!cats.empty()) cats.pop_back();
    std::string out = prompt_template.empty() ? default_prompt_template() : prompt_template;
    const std::string slot = "{categories}";
    if (const auto pos = out.find(slot); pos != std::string::npos) out.replace(pos, slot.size(), cats);
    return out;
}

std::string chat_request_body(const std::string& model, const std::string& system_prompt, const std::string& text) {
    nlohmann::json body{{"model", model},
                        {"temperature", 0},
                        {"messages",
                         {{{"role", "system"}, {"content", system_prompt}}, {{"role", "user"}, {"content", text}}}}};
    return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string parse_chat_response(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("unexpected chat-completion response: ") + e.what());
    }
}

PseudoLabel interpret_response(const std::string& example_id, const std::string& response, const LabelSchema& schema) {
    PseudoLabel pl;
    pl.example_id = example_id;
    pl.label = schema.match(response);
    pl.confidence = 1.0;
    pl.source = LabelSource::remote;
    pl.raw_response = response;
    return pl;
}

RemoteAnnotation annotate_remote(const AnnotationRequest& request, const LabelSchema& schema, AnnotationCache& cache) {
    request.validate();
    const std::string prompt = render_prompt(request.prompt_template, schema);
    std::string token;
    if (const char* env = std::getenv(request.token_env.c_str())) token = env;

    // One job per distinct uncached text.
    std::vector<std::string> job_texts;
    std::unordered_map<std::string, std::size_t> job_of_text;
    std::vector<std::optional<std::string>> answers(request.batch.size());
    RemoteAnnotation result;
    for (std::size_t i = 0; i < request.batch.size(); ++i) {
        const auto& item = request.batch[i];
        if (auto hit = cache.get(CacheKey::make(request.model, prompt, item.text))) {
            answers[i] = std::move(hit);
            ++result.cache_hits;
        } else if (!job_of_text.count(item.text)) {
            job_of_text.emplace(item.text, job_texts.size());
            job_texts.push_back(item.text);
        }
    }

    std::vector<std::optional<std::string>> job_answers(job_texts.size());
    std::vector<std::string> job_errors(job_texts.size());
    std::atomic<std::size_t> next_job{0};
    std::atomic<std::size_t> requests{0};
    std::atomic<bool> abort{false};
    std::mutex auth_mutex;
    std::string auth_message;
    RateLimiter limiter(request.rate_limit);

    auto worker = [&] {
        httplib::Client client(request.endpoint);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(request.timeout).count());
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(request.timeout).count());
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

        while (!abort.load()) {
            const std::size_t j = next_job.fetch_add(1);
            if (j >= job_texts.size()) return;
            const std::string body = chat_request_body(request.model, prompt, job_texts[j]);
            std::string last_error;
            for (std::size_t attempt = 0; attempt <= request.max_retries && !abort.load(); ++attempt) {
                if (attempt > 0) std::this_thread::sleep_for(request.initial_backoff * (1LL << (attempt - 1)));
                limiter.acquire();
                ++requests;
                const auto res = client.Post(request.path, headers, body, "application/json");
                if (!res) {
                    last_error = "transport error: " + httplib::to_string(res.error());
                    continue;
                }
                if (res->status == 401 || res->status == 403) {
                    std::lock_guard lock(auth_mutex);
                    auth_message = "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")";
                    abort = true;
                    return;
                }
                if (is_transient(res->status)) {
                    last_error = "HTTP " + std::to_string(res->status);
                    continue;
                }
                if (res->status != 200) {
                    last_error = "HTTP " + std::to_string(res->status);
                    break;
                }
                try {
                    const auto content = parse_chat_response(res->body);
                    cache.put(CacheKey::make(request.model, prompt, job_texts[j]), content);
                    job_answers[j] = content;
                    last_error.clear();
                } catch (const ParseError& e) {
                    last_error = e.what();
                }
                break;
            }
            if (!job_answers[j]) job_errors[j] = last_error.empty() ? "no response" : last_error;
        }
    };

    const std::size_t width = std::min(request.concurrency, std::max<std::size_t>(job_texts.size(), 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < width && !job_texts.empty(); ++t) pool.emplace_back(worker);
    }
    result.requests_sent = requests.load();
    if (abort.load()) throw AuthError(auth_message);

    for (std::size_t i = 0; i < request.batch.size(); ++i) {
        const auto& item = request.batch[i];
        if (!answers[i]) {
            const auto j = job_of_text.at(item.text);
            if (job_answers[j]) {
                answers[i] = job_answers[j];
            } else {
                result.failures.push_back({item.id, job_errors[j]});
                continue;
            }
        }
        result.labels.push_back(interpret_response(item.id, *answers[i], schema));
    }
    return result;
}

}  // namespace crisis
