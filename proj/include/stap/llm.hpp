#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stap {

// STAP_MODEL when set, otherwise "gpt-3.5-turbo".
std::string default_model_id();

struct CompletionRequest {
    std::string model_id = default_model_id();
    double temperature = 0.5;
    std::string prompt_text;
    int max_tokens = 256;
    std::chrono::seconds timeout{30};
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
    int total_tokens = 0;
};

struct CompletionResponse {
    std::string text;  // trimmed
    std::string model_id;
    std::int64_t latency_ms = 0;
    std::optional<TokenUsage> usage;
};

// Throws ValidationError: temperature outside [0, 1], empty prompt,
// non-positive max_tokens.
void validate_request(const CompletionRequest& request);

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

// Offline stand-in: maps (prompt_text, temperature) to a one- or two-sentence
// hint through a seeded hash. Reports zero latency so runs are reproducible.
class MockBackend final : public ChatBackend {
public:
    explicit MockBackend(std::uint64_t seed = 0) : seed_(seed) {}
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }

private:
    std::uint64_t seed_;
};

std::shared_ptr<ChatBackend> make_mock(std::uint64_t seed = 0);

// Keeps whole sentences while the whitespace-token count stays within
// `max_tokens`; a first sentence that alone is too long is cut.
std::string truncate_to_tokens(const std::string& text, int max_tokens);

// ---------------------------------------------------------------------------
// OpenAI-compatible chat-completions over HTTP(S)

struct HttpResponse {
    int status = 0;  // 0: no response (connection failure or timeout)
    std::string body;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& base_url, const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              const std::string& body, std::chrono::milliseconds timeout) = 0;
};

std::shared_ptr<HttpTransport> make_http_transport();

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{1000};
    // Each delay is base * 2^attempt scaled by a uniform factor in [1 - jitter, 1 + jitter].
    double jitter = 0.5;
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to std::this_thread::sleep_for
};

struct OpenAiConfig {
    std::string api_key;
    std::string base_url = "https://api.openai.com/v1";

    // STAP_API_KEY and STAP_API_BASE.
    static OpenAiConfig from_env();
};

class OpenAiBackend final : public ChatBackend {
public:
    explicit OpenAiBackend(OpenAiConfig config, std::shared_ptr<HttpTransport> transport = make_http_transport(),
                           RetryPolicy retry = {});

    // Sends a single user message. Retries HTTP 429, 5xx and transport
    // failures. CredentialError on a missing key or HTTP 401/403,
    // TransportError once retries are exhausted or on other HTTP errors,
    // EmptyResponseError when the first choice has no content.
    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "openai"; }

    static std::string build_request_body(const CompletionRequest& request);

private:
    std::chrono::milliseconds backoff(int attempt);

    OpenAiConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy retry_;
    std::mutex rng_mutex_;
    std::uint64_t rng_state_;
};

// Shareable front end: validates requests, caps concurrent calls and
// normalises the response text.
class LlmClient {
public:
    explicit LlmClient(std::shared_ptr<ChatBackend> backend, std::size_t max_in_flight = 4);

    CompletionResponse complete(const CompletionRequest& request) const;

    std::size_t max_in_flight() const { return max_in_flight_; }
    const ChatBackend& backend() const { return *backend_; }

private:
    std::shared_ptr<ChatBackend> backend_;
    std::size_t max_in_flight_;
    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
    mutable std::size_t in_flight_ = 0;
};

} // namespace stap
