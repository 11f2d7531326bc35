#include "crisis/error.hpp"
#include "crisis/remote_annotator.hpp"
#include "json.hpp"
#include "mock_llm_server.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>

using namespace crisis;
using crisis::testing::TempDir;

namespace {

AnnotationRequest request_for(const mock::MockLlmServer& server, std::vector<AnnotationItem> batch) {
    AnnotationRequest r;
    r.endpoint = server.endpoint();
    r.model = "mock";
    r.batch = std::move(batch);
    r.rate_limit = 0;
    r.initial_backoff = std::chrono::milliseconds(20);
    r.token_env = "CRISIS_SSL_TEST_TOKEN_UNSET";
    return r;
}

mock::MockOptions table(std::map<std::string, std::string> labels) {
    mock::MockOptions o;
    o.responder = mock::table_responder(std::move(labels), "banana");
    return o;
}

}  // namespace

TEST(Prompt, ListsEveryCategory) {
    const auto schema = humaid_schema();
    const auto prompt = render_prompt(default_prompt_template(), schema);
    for (const auto& c : schema.categories()) EXPECT_NE(prompt.find(c), std::string::npos) << c;
    EXPECT_EQ(prompt.find("{categories}"), std::string::npos);
}

TEST(Wire, RequestAndResponseShape) {
    const auto body = nlohmann::json::parse(chat_request_body("gpt-4o", "sys", "tweet"));
    EXPECT_EQ(body["model"], "gpt-4o");
    EXPECT_EQ(body["messages"][0]["role"], "system");
    EXPECT_EQ(body["messages"][1]["content"], "tweet");
    EXPECT_EQ(parse_chat_response(R"({"choices":[{"message":{"role":"assistant","content":"Sympathy and support"}}]})"),
              "Sympathy and support");
    EXPECT_THROW(parse_chat_response(R"({"choices":[]})"), ParseError);
    EXPECT_THROW(parse_chat_response("not json"), ParseError);
}

TEST(Interpret, InSchemaAndOos) {
    const auto in = interpret_response("a", " Injured or dead people\n", humaid_schema());
    EXPECT_EQ(in.label, 4u);
    EXPECT_FALSE(in.is_oos());
    EXPECT_EQ(in.confidence, 1.0);
    const auto out = interpret_response("b", "banana", humaid_schema());
    EXPECT_TRUE(out.is_oos());
    EXPECT_EQ(out.raw_response, "banana");
}

TEST(Remote, LabelsOosAndCache) {
    mock::MockLlmServer server(table({{"two dead in collapse", "Injured or dead people"}}));
    TempDir dir;
    AnnotationCache cache(dir / "cache.jsonl");
    const auto req = request_for(server, {{"a", "two dead in collapse"}, {"b", "what a day"}, {"c", "what a day"}});
    const auto first = annotate_remote(req, humaid_schema(), cache);
    ASSERT_TRUE(first.failures.empty());
    ASSERT_EQ(first.labels.size(), 3u);
    EXPECT_EQ(first.labels[0].label, 4u);
    EXPECT_EQ(first.labels[0].source, LabelSource::remote);
    EXPECT_TRUE(first.labels[1].is_oos());
    EXPECT_EQ(first.labels[1].raw_response, "banana");
    EXPECT_EQ(first.labels[2].example_id, "c");
    EXPECT_EQ(server.total_requests(), 2u);  // duplicate text asked once

    const auto second = annotate_remote(req, humaid_schema(), cache);
    EXPECT_EQ(server.total_requests(), 2u);
    EXPECT_EQ(second.requests_sent, 0u);
    EXPECT_EQ(second.cache_hits, 3u);
    EXPECT_EQ(second.labels[0].label, 4u);
}

TEST(Remote, RetriesTransientFailures) {
    auto opts = table({{"x", "Sympathy and support"}});
    opts.fail_first = 2;
    mock::MockLlmServer server(opts);
    TempDir dir;
    AnnotationCache cache(dir / "cache.jsonl");
    const auto start = std::chrono::steady_clock::now();
    const auto r = annotate_remote(request_for(server, {{"a", "x"}}), humaid_schema(), cache);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    ASSERT_TRUE(r.failures.empty());
    EXPECT_EQ(r.labels[0].label, 1u);
    EXPECT_EQ(server.requests_for("x"), 3u);
    EXPECT_EQ(r.requests_sent, 3u);
    EXPECT_GE(elapsed, std::chrono::milliseconds(20 + 40));
}

TEST(Remote, GivesUpAfterMaxRetries) {
    auto opts = table({});
    opts.fail_first = 100;
    mock::MockLlmServer server(opts);
    TempDir dir;
    AnnotationCache cache(dir / "cache.jsonl");
    auto req = request_for(server, {{"a", "x"}});
    req.max_retries = 2;
    const auto r = annotate_remote(req, humaid_schema(), cache);
    EXPECT_TRUE(r.labels.empty());
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(server.requests_for("x"), 3u);
    EXPECT_EQ(cache.size(), 0u);
}

TEST(Remote, BearerToken) {
    auto opts = table({{"x", "Sympathy and support"}});
    opts.required_token = "s3cret";
    mock::MockLlmServer server(opts);
    TempDir dir;
    AnnotationCache cache(dir / "cache.jsonl");
    auto req = request_for(server, {{"a", "x"}});
    EXPECT_THROW(annotate_remote(req, humaid_schema(), cache), AuthError);
    ::setenv("CRISIS_SSL_TEST_TOKEN", "s3cret", 1);
    req.token_env = "CRISIS_SSL_TEST_TOKEN";
    const auto r = annotate_remote(req, humaid_schema(), cache);
    EXPECT_EQ(r.labels.at(0).label, 1u);
}

TEST(Remote, ValidatesRequest) {
    AnnotationRequest r;
    r.endpoint = "ftp://nowhere";
    EXPECT_THROW(r.validate(), ConfigError);
}
