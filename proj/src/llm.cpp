#include "stap/llm.hpp"

#include "stap/error.hpp"
#include "stap/util.hpp"

#include "httplib.h"
#include "json.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <thread>

namespace stap {

using nlohmann::json;

std::string default_model_id() { return env_or("STAP_MODEL", "gpt-3.5-turbo"); }

void validate_request(const CompletionRequest& request) {
    if (!(request.temperature >= 0.0 && request.temperature <= 1.0)) {
        throw ValidationError("temperature must be within [0, 1]");
    }
    if (request.prompt_text.empty()) throw ValidationError("prompt_text must be non-empty");
    if (request.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
    if (request.model_id.empty()) throw ValidationError("model_id must be non-empty");
}

// ---------------------------------------------------------------------------
// Mock

namespace {

constexpr std::array<std::string_view, 6> openers = {
    "Think about how your code handles", "Check", "Consider what happens with", "Look again at",
    "A good next step is to work on", "Focus on"};

constexpr std::array<std::string_view, 8> focuses = {
    "the input values",         "the loop condition",          "adjacent equal values",
    "the final print statement", "the order of your operations", "the edge cases of the input",
    "how you update your variables", "the variable that stores your result"};

constexpr std::array<std::string_view, 4> followups = {
    "Start with a small example and trace it by hand.", "You are on the right track.",
    "Keep the rest of your code as it is.", "Test it with the example from the description."};

std::vector<std::string> split_sentences_simple(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        cur.push_back(text[i]);
        bool terminal = text[i] == '.' || text[i] == '!' || text[i] == '?';
        if (terminal && (i + 1 == text.size() || text[i + 1] == ' ')) {
            out.push_back(trim(cur));
            cur.clear();
        }
    }
    if (!trim_view(cur).empty()) out.push_back(trim(cur));
    return out;
}

} // namespace

std::string truncate_to_tokens(const std::string& text, int max_tokens) {
    if (max_tokens <= 0) return {};
    std::string out;
    std::size_t used = 0;
    for (const auto& sentence : split_sentences_simple(text)) {
        auto words = split_whitespace(sentence);
        if (used + words.size() > static_cast<std::size_t>(max_tokens)) {
            if (out.empty()) {
                for (int i = 0; i < max_tokens; ++i) {
                    if (i) out.push_back(' ');
                    out += words[static_cast<std::size_t>(i)];
                }
                char last = out.back();
                if (last != '.' && last != '!' && last != '?') out.push_back('.');
            }
            break;
        }
        if (!out.empty()) out.push_back(' ');
        out += sentence;
        used += words.size();
    }
    return out;
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.6f", request.temperature);
    std::uint64_t h = fnv1a64(request.prompt_text, fnv1a64(temp, fnv1a64(to_hex(seed_))));
    std::string text = "Mock hint " + to_hex(h >> 32, 8) + ": ";
    text += openers[h % openers.size()];
    text += ' ';
    text += focuses[(h >> 8) % focuses.size()];
    text += '.';
    if (((h >> 16) & 1U) != 0) {
        text += ' ';
        text += followups[(h >> 20) % followups.size()];
    }
    CompletionResponse r;
    r.text = truncate_to_tokens(text, request.max_tokens);
    r.model_id = "mock";
    r.latency_ms = 0;
    auto words = static_cast<int>(split_whitespace(r.text).size());
    r.usage = TokenUsage{static_cast<int>(split_whitespace(request.prompt_text).size()), words,
                         static_cast<int>(split_whitespace(request.prompt_text).size()) + words};
    return r;
}

std::shared_ptr<ChatBackend> make_mock(std::uint64_t seed) { return std::make_shared<MockBackend>(seed); }

// ---------------------------------------------------------------------------
// HTTP transport

namespace {

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post(const std::string& base_url, const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& headers, const std::string& body,
                      std::chrono::milliseconds timeout) override {
        // base_url = scheme://host[:port][/prefix]
        auto scheme_end = base_url.find("://");
        if (scheme_end == std::string::npos) throw ConfigError("STAP_API_BASE must include a scheme");
        auto path_start = base_url.find('/', scheme_end + 3);
        std::string origin = base_url.substr(0, path_start);
        std::string prefix = path_start == std::string::npos ? std::string() : base_url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

        httplib::Client client(origin);
        if (!client.is_valid()) throw ConfigError("unsupported API base URL (HTTPS needs OpenSSL support)");
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Post(prefix + path, h, body, "application/json");
        HttpResponse out;
        if (!res) {
            out.error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    }
};

} // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

// ---------------------------------------------------------------------------
// OpenAI-compatible backend

OpenAiConfig OpenAiConfig::from_env() {
    OpenAiConfig c;
    c.api_key = env_or("STAP_API_KEY");
    c.base_url = env_or("STAP_API_BASE", c.base_url);
    return c;
}

OpenAiBackend::OpenAiBackend(OpenAiConfig config, std::shared_ptr<HttpTransport> transport, RetryPolicy retry)
    : config_(std::move(config)), transport_(std::move(transport)), retry_(std::move(retry)),
      rng_state_(static_cast<std::uint64_t>(now_ms()) ^ 0x9e3779b97f4a7c15ULL) {
    if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string OpenAiBackend::build_request_body(const CompletionRequest& request) {
    json body = {{"model", request.model_id},
                 {"messages", json::array({{{"role", "user"}, {"content", request.prompt_text}}})},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens}};
    return body.dump();
}

std::chrono::milliseconds OpenAiBackend::backoff(int attempt) {
    double u;
    {
        std::lock_guard lock(rng_mutex_);
        // splitmix64
        std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        u = static_cast<double>(z >> 11) / static_cast<double>(1ULL << 53);
    }
    double factor = 1.0 - retry_.jitter + 2.0 * retry_.jitter * u;
    double ms = static_cast<double>(retry_.base_delay.count()) * std::ldexp(1.0, attempt) * factor;
    return std::chrono::milliseconds(static_cast<long long>(std::llround(ms)));
}

CompletionResponse OpenAiBackend::complete(const CompletionRequest& request) {
    if (config_.api_key.empty()) throw CredentialError("no API credential: set STAP_API_KEY");
    validate_request(request);
    const std::string body = build_request_body(request);
    const std::vector<std::pair<std::string, std::string>> headers = {
        {"Authorization", "Bearer " + config_.api_key}};
    auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(request.timeout);

    std::string last_failure;
    for (int attempt = 0;; ++attempt) {
        auto start = std::chrono::steady_clock::now();
        HttpResponse res = transport_->post(config_.base_url, "/chat/completions", headers, body, timeout);
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

        if (res.status == 200) {
            json parsed;
            try {
                parsed = json::parse(res.body);
            } catch (const json::exception&) {
                throw TransportError("malformed completion response");
            }
            std::string text;
            if (parsed.contains("choices") && parsed["choices"].is_array() && !parsed["choices"].empty()) {
                json msg = parsed["choices"][0].value("message", json::object());
                if (msg.contains("content") && msg["content"].is_string()) text = trim(msg["content"].get<std::string>());
            }
            if (text.empty()) throw EmptyResponseError("completion contained no text");
            CompletionResponse out;
            out.text = std::move(text);
            out.model_id = parsed.contains("model") && parsed["model"].is_string() ? parsed["model"].get<std::string>() : request.model_id;
            out.latency_ms = latency.count();
            if (parsed.contains("usage") && parsed["usage"].is_object()) {
                const auto& u = parsed["usage"];
                out.usage = TokenUsage{u.value("prompt_tokens", 0), u.value("completion_tokens", 0),
                                       u.value("total_tokens", 0)};
            }
            return out;
        }
        if (res.status == 401 || res.status == 403) {
            throw CredentialError("API rejected the credential (HTTP " + std::to_string(res.status) + ")");
        }
        bool retryable = res.status == 0 || res.status == 408 || res.status == 429 || res.status >= 500;
        last_failure = res.status == 0 ? "no response (" + res.error + ")" : "HTTP " + std::to_string(res.status);
        if (!retryable) throw TransportError("completion request failed: " + last_failure);
        if (attempt >= retry_.max_retries) {
            throw TransportError("completion request failed after " + std::to_string(attempt + 1) +
                                 " attempts: " + last_failure);
        }
        retry_.sleep(backoff(attempt));
    }
}

// ---------------------------------------------------------------------------
// Client

LlmClient::LlmClient(std::shared_ptr<ChatBackend> backend, std::size_t max_in_flight)
    : backend_(std::move(backend)), max_in_flight_(max_in_flight == 0 ? 1 : max_in_flight) {
    if (!backend_) throw ConfigError("LlmClient needs a backend");
}

CompletionResponse LlmClient::complete(const CompletionRequest& request) const {
    validate_request(request);
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
        ++in_flight_;
    }
    struct Release {
        const LlmClient& c;
        ~Release() {
            {
                std::lock_guard lock(c.mutex_);
                --c.in_flight_;
            }
            c.cv_.notify_one();
        }
    } release{*this};
    CompletionResponse r = backend_->complete(request);
    r.text = trim(r.text);
    if (r.text.empty()) throw EmptyResponseError("backend returned an empty completion");
    return r;
}

} // namespace stap
