#include "mock_llm_server.hpp"

#include "httplib.h"
#include "json.hpp"

#include <stdexcept>

namespace crisis::mock {

namespace {

std::string completion_body(const std::string& content) {
    const nlohmann::json body{
        {"id", "mock-completion"},
        {"object", "chat.completion"},
        {"choices",
         {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}, {"finish_reason", "stop"}}}}};
    return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace

MockLlmServer::MockLlmServer(MockOptions options)
    : options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    if (!options_.responder) options_.responder = [](const std::string&, const std::string&) { return "unknown"; };

    server_->Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
        std::string system, text;
        try {
            const auto j = nlohmann::json::parse(req.body);
            for (const auto& m : j.at("messages")) {
                const auto role = m.at("role").get<std::string>();
                if (role == "system") system = m.at("content").get<std::string>();
                if (role == "user") text = m.at("content").get<std::string>();
            }
        } catch (const nlohmann::json::exception& e) {
            res.status = 400;
            res.set_content(std::string("{\"error\":\"bad request\"}"), "application/json");
            return;
        }

        std::size_t seen = 0;
        {
            std::lock_guard lock(mutex_);
            ++total_;
            seen = ++per_text_[text];
        }
        if (options_.required_token && req.get_header_value("Authorization") != "Bearer " + *options_.required_token) {
            res.status = 401;
            res.set_content("{\"error\":\"unauthorized\"}", "application/json");
            return;
        }
        if (seen <= options_.fail_first) {
            res.status = options_.fail_status;
            res.set_content("{\"error\":\"injected failure\"}", "application/json");
            return;
        }
        const std::string reply = options_.responder(system, text);
        {
            std::lock_guard lock(mutex_);
            ++served_;
        }
        res.set_content(completion_body(reply), "application/json");
    });

    port_ = options_.port > 0 ? (server_->bind_to_port(options_.host, options_.port) ? options_.port : -1)
                              : server_->bind_to_any_port(options_.host);
    if (port_ <= 0) throw std::runtime_error("mock LLM server could not bind " + options_.host);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

MockLlmServer::~MockLlmServer() { stop(); }

void MockLlmServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::string MockLlmServer::endpoint() const { return "http://" + options_.host + ":" + std::to_string(port_); }

std::size_t MockLlmServer::total_requests() const {
    std::lock_guard lock(mutex_);
    return total_;
}

std::size_t MockLlmServer::requests_for(const std::string& text) const {
    std::lock_guard lock(mutex_);
    const auto it = per_text_.find(text);
    return it == per_text_.end() ? 0 : it->second;
}

std::size_t MockLlmServer::completions_served() const {
    std::lock_guard lock(mutex_);
    return served_;
}

Responder table_responder(std::map<std::string, std::string> labels, std::string fallback) {
    return [labels = std::move(labels), fallback = std::move(fallback)](const std::string&, const std::string& text) {
        const auto it = labels.find(text);
        return it == labels.end() ? fallback : it->second;
    };
}

}  // namespace crisis::mock
