#include "stap/http_api.hpp"

#include "stap/error.hpp"
#include "stap/hint_service.hpp"

#include "httplib.h"
#include "json.hpp"

namespace stap {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw ValidationError("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON body: ") + e.what());
    }
}

std::string required_string(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string()) {
        throw ValidationError(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

int required_score(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_number_integer()) {
        throw ValidationError(std::string("rating '") + key + "' must be an integer from 1 to 5");
    }
    return it->get<int>();
}

template <typename F>
httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            json body = {{"error", e.kind()}, {"message", e.what()}};
            if (dynamic_cast<const TransportError*>(&e) || dynamic_cast<const EmptyResponseError*>(&e)) {
                body["retry"] = "the hint service is temporarily unavailable, retry later";
            }
            send_json(res, http_status_for(e), body);
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
        }
    };
}

} // namespace

int http_status_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e)) return 400;
    if (dynamic_cast<const NotFoundError*>(&e)) return 404;
    if (dynamic_cast<const ConflictError*>(&e)) return 409;
    if (dynamic_cast<const TransportError*>(&e) || dynamic_cast<const EmptyResponseError*>(&e)) return 502;
    if (dynamic_cast<const CredentialError*>(&e)) return 503;
    return 500;
}

void register_routes(httplib::Server& server, HintService& service) {
    server.Get("/api/exercises", guarded([&service](const httplib::Request&, httplib::Response& res) {
                   send_json(res, 200, service.list_exercises());
               }));

    server.Post("/api/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    json body = parse_body(req);
                    std::string alias;
                    if (body.contains("participant_alias") && !body["participant_alias"].is_null()) {
                        alias = required_string(body, "participant_alias");
                    }
                    Session s = service.start_session(required_string(body, "exercise_id"), alias);
                    send_json(res, 201, session_to_json(s));
                }));

    server.Post(R"(/api/sessions/([^/]+)/hints)",
                guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    json body = parse_body(req);
                    Hint h = service.request_hint(req.matches[1].str(), required_string(body, "source"));
                    send_json(res, 201, hint_to_json(h));
                }));

    server.Post(R"(/api/hints/([^/]+)/rating)",
                guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    json body = parse_body(req);
                    HintRating r;
                    r.hint_id = req.matches[1].str();
                    r.clear = required_score(body, "clear");
                    r.fits = required_score(body, "fits");
                    r.helpful = required_score(body, "helpful");
                    if (body.contains("comment") && !body["comment"].is_null()) {
                        r.comment = required_string(body, "comment");
                    }
                    service.rate_hint(r);
                    send_json(res, 201, {{"status", "stored"}, {"hint_id", r.hint_id}});
                }));

    server.Post(R"(/api/sessions/([^/]+)/check)",
                guarded([&service](const httplib::Request& req, httplib::Response& res) {
                    json body = parse_body(req);
                    CheckResult r = service.check(req.matches[1].str(), required_string(body, "source"));
                    send_json(res, 200, check_result_to_json(r));
                }));

    server.Get("/api/export", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                   std::string which = req.has_param("session") ? req.get_param_value("session") : "all";
                   std::optional<std::string> id;
                   if (which != "all") id = which;
                   res.status = 200;
                   res.set_content(service.export_events(id), "application/x-ndjson");
               }));
}

ApiServer::ApiServer(HintService& service, std::optional<std::filesystem::path> static_dir)
    : server_(std::make_unique<httplib::Server>()) {
    register_routes(*server_, service);
    if (static_dir && !server_->set_mount_point("/", static_dir->string())) {
        throw ConfigError("static directory not found: " + static_dir->string());
    }
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw ConfigError("could not bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) {
        throw ConfigError("could not bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void ApiServer::serve() { server_->listen_after_bind(); }

void ApiServer::stop() {
    if (server_) server_->stop();
}

} // namespace stap
