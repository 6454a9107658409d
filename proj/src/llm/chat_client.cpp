#include "kgreason/llm/chat_client.hpp"

#include "json.hpp"

namespace kgreason::llm {

ChatClient::ChatClient(ChatClientOptions options) : options_(std::move(options)) {
    while (!options_.base_url.empty() && options_.base_url.back() == '/') options_.base_url.pop_back();
    if (options_.base_url.empty()) throw std::invalid_argument("chat base URL is empty");
}

std::string ChatClient::request_body(const std::string& prompt, const GenerationConfig& config) {
    nlohmann::json body = {
        {"model", config.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config.temperature},
        {"max_tokens", config.max_tokens},
        {"frequency_penalty", config.frequency_penalty},
        {"presence_penalty", config.presence_penalty},
    };
    return body.dump();
}

Completion ChatClient::complete(const std::string& prompt, const GenerationConfig& config) const {
    if (prompt.empty()) throw LlmError(LlmErrorKind::invalid_request, "empty prompt");
    config.validate();

    HttpRequest req;
    req.url = options_.base_url + "/chat/completions";
    req.body = request_body(prompt, config);
    req.content_type = "application/json";
    req.timeout = options_.timeout;
    if (!options_.api_key.empty()) req.headers["Authorization"] = "Bearer " + options_.api_key;

    auto start = std::chrono::steady_clock::now();
    HttpResponse res;
    try {
        res = http_post(req, options_.retry);
    } catch (const HttpError& e) {
        throw LlmError(e.status() == 429 ? LlmErrorKind::rate_limited : LlmErrorKind::transport, e.what());
    }
    auto latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);

    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw LlmError(LlmErrorKind::bad_response, "chat response has no choices");
    }
    const auto& message = doc["choices"][0].value("message", nlohmann::json::object());
    Completion c;
    if (message.contains("content") && message["content"].is_string()) c.text = message["content"].get<std::string>();
    if (doc.contains("usage") && doc["usage"].is_object()) {
        c.usage.input_tokens = doc["usage"].value("prompt_tokens", uint64_t{0});
        c.usage.output_tokens = doc["usage"].value("completion_tokens", uint64_t{0});
    } else {
        c.usage = {approx_tokens(prompt), approx_tokens(c.text)};
    }
    c.latency = latency;
    return c;
}

}  // namespace kgreason::llm
