#include "mock_llm_server.hpp"

#include "crisis/corpus.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <iostream>
#include <thread>

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mock chat-completion endpoint that answers from a labeled corpus"};
    int port = 8089;
    std::string host = "127.0.0.1";
    std::string labels_path;
    std::string fallback = "unknown";
    std::size_t fail_first = 0;
    int fail_status = 503;
    std::string token;
    app.add_option("--host", host, "Bind address");
    app.add_option("--port", port, "Port (0 picks a free one)");
    app.add_option("--labels", labels_path, "TSV (id, text, label) whose labels are returned for matching texts");
    app.add_option("--fallback", fallback, "Reply for texts not found in --labels");
    app.add_option("--fail-first", fail_first, "Fail the first N requests for every text");
    app.add_option("--fail-status", fail_status, "HTTP status used for injected failures");
    app.add_option("--token", token, "Require this bearer token");
    CLI11_PARSE(app, argc, argv);

    try {
        std::map<std::string, std::string> table;
        if (!labels_path.empty()) {
            const auto schema = crisis::humaid_schema();
            for (const auto& ex : crisis::read_examples(labels_path, schema))
                if (ex.gold_label) table[ex.text] = schema.name(*ex.gold_label);
        }
        crisis::mock::MockOptions options;
        options.host = host;
        options.port = port;
        options.responder = crisis::mock::table_responder(std::move(table), fallback);
        options.fail_first = fail_first;
        options.fail_status = fail_status;
        if (!token.empty()) options.required_token = token;

        crisis::mock::MockLlmServer server(options);
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cout << "listening on " << server.endpoint() << std::endl;
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
        std::cout << "served " << server.completions_served() << " completions (" << server.total_requests()
                  << " requests)" << std::endl;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
