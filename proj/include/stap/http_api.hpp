#pragma once

#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace stap {

class HintService;

// HTTP status for a library exception (400 validation, 404, 409, 502 model
// transport, 503 missing credential, 500 otherwise).
int http_status_for(const std::exception& e);

// Registers the JSON API on `server`:
//   GET  /api/exercises
//   POST /api/sessions                 {exercise_id, participant_alias?}
//   POST /api/sessions/{id}/hints      {source}
//   POST /api/hints/{id}/rating        {clear, fits, helpful, comment?}
//   POST /api/sessions/{id}/check      {source}
//   GET  /api/export?session={id|all}
// Errors are {"error": kind, "message": text}.
void register_routes(httplib::Server& server, HintService& service);

class ApiServer {
public:
    explicit ApiServer(HintService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~ApiServer();

    // Binds; port 0 picks a free port. Returns the bound port, throws ConfigError on failure.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void serve();
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
};

} // namespace stap
