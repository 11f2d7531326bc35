#pragma once

#include "crisis/annotation_cache.hpp"
#include "crisis/corpus.hpp"
#include "crisis/oracle.hpp"

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

namespace crisis {

struct AnnotationItem {
    std::string id;
    std::string text;
};

/// One batch for a chat-completion endpoint. The prompt template's
/// `{categories}` slot is filled with the schema's class names and definitions.
struct AnnotationRequest {
    std::string endpoint = "https://api.openai.com";  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string prompt_template;                       // empty: default_prompt_template()
    std::string token_env = "CRISIS_SSL_API_TOKEN";    // bearer token source; unset means no header
    std::vector<AnnotationItem> batch;
    std::size_t max_retries = 3;
    double rate_limit = 5.0;  // request starts per second; <= 0 disables the limit
    std::size_t concurrency = 4;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::milliseconds timeout{30000};

    void validate() const;
};

struct AnnotationFailure {
    std::string example_id;
    std::string error;
};

struct RemoteAnnotation {
    std::vector<PseudoLabel> labels;  // one per successfully answered item, batch order
    std::vector<AnnotationFailure> failures;
    std::size_t requests_sent = 0;    // including retries
    std::size_t cache_hits = 0;
};

std::string default_prompt_template();

// Fills `{categories}`; HumAID classes get a one-line definition each.
std::string render_prompt(const std::string& prompt_template, const LabelSchema& schema);

// Request body in the chat-completion wire shape.
std::string chat_request_body(const std::string& model, const std::string& system_prompt, const std::string& text);

// Extracts choices[0].message.content. Throws ParseError on other shapes.
std::string parse_chat_response(const std::string& body);

PseudoLabel interpret_response(const std::string& example_id, const std::string& response, const LabelSchema& schema);

/// Annotates every item, answering from `cache` where possible and issuing one
/// request per distinct uncached text otherwise. Transient failures (transport
/// errors, 429, 5xx) are retried with exponential backoff; items that still
/// fail are listed in `failures`. A 401/403 aborts the whole call with AuthError.
RemoteAnnotation annotate_remote(const AnnotationRequest& request, const LabelSchema& schema, AnnotationCache& cache);

}  // namespace crisis
