#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace crisis::mock {

/// Maps (system prompt, user text) to the assistant reply.
using Responder = std::function<std::string(const std::string& system_prompt, const std::string& text)>;

struct MockOptions {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks a free port
    Responder responder;
    // The first `fail_first` requests for every distinct text are answered
    // with `fail_status` instead of a completion.
    std::size_t fail_first = 0;
    int fail_status = 503;
    std::optional<std::string> required_token;  // bearer token; 401 when absent or wrong
};

/// In-process chat-completion endpoint (POST /v1/chat/completions) for tests
/// and offline demos. Serves on a background thread until destroyed.
class MockLlmServer {
public:
    explicit MockLlmServer(MockOptions options);
    ~MockLlmServer();
    MockLlmServer(const MockLlmServer&) = delete;
    MockLlmServer& operator=(const MockLlmServer&) = delete;

    int port() const noexcept { return port_; }
    std::string endpoint() const;  // http://host:port

    std::size_t total_requests() const;
    std::size_t requests_for(const std::string& text) const;
    std::size_t completions_served() const;

    void stop();

private:
    MockOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> per_text_;
    std::size_t total_ = 0;
    std::size_t served_ = 0;
};

// Replies with labels[text], or `fallback` for texts not in the table.
Responder table_responder(std::map<std::string, std::string> labels, std::string fallback);

}  // namespace crisis::mock
