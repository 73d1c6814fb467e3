// Tutor backend: serves the hint/rating/check JSON API over HTTP.

#include "stap/error.hpp"
#include "stap/exercise.hpp"
#include "stap/hint_service.hpp"
#include "stap/http_api.hpp"
#include "stap/llm.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"stap-server: next-step hint tutor backend"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "data";
    std::string catalog_dir;
    std::string static_dir;
    std::string runner_config;
    bool mock = false;
    std::size_t max_in_flight = 4;
    app.add_option("--host", host, "Address to bind");
    app.add_option("--port", port, "Port (0 picks a free one)");
    app.add_option("--data-dir", data_dir, "Where session event logs are kept");
    app.add_option("--catalog-dir", catalog_dir, "Directory of extra exercise definitions (*.json)");
    app.add_option("--static-dir", static_dir, "Serve the web front end from this directory");
    app.add_option("--runner-config", runner_config, "JSON file configuring the solution runner");
    app.add_option("--max-in-flight", max_in_flight, "Concurrent model calls");
    app.add_flag("--mock-llm", mock, "Use the deterministic offline model");
    CLI11_PARSE(app, argc, argv);

    try {
        auto catalog = stap::load_catalog(catalog_dir.empty() ? std::nullopt
                                                              : std::optional<std::filesystem::path>(catalog_dir));
        std::shared_ptr<stap::ChatBackend> backend;
        if (mock) {
            backend = stap::make_mock();
        } else {
            auto config = stap::OpenAiConfig::from_env();
            if (config.api_key.empty()) {
                throw stap::CredentialError("no API credential: set STAP_API_KEY or pass --mock-llm");
            }
            backend = std::make_shared<stap::OpenAiBackend>(config);
        }
        auto client = std::make_shared<const stap::LlmClient>(backend, max_in_flight);

        stap::ServiceOptions options;
        options.data_dir = data_dir;
        options.runner = stap::load_runner_config(
            runner_config.empty() ? std::nullopt : std::optional<std::filesystem::path>(runner_config));
        stap::HintService service(std::move(catalog), client, options);

        stap::ApiServer server(service, static_dir.empty() ? std::nullopt
                                                           : std::optional<std::filesystem::path>(static_dir));
        int bound = server.bind(host, port);
        std::cout << "listening on http://" << host << ":" << bound << " (backend " << backend->name() << ", "
                  << service.session_count() << " sessions loaded)" << std::endl;
        server.serve();
    } catch (const stap::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
