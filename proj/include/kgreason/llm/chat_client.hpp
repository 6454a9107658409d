#pragma once

#include "kgreason/http.hpp"
#include "kgreason/llm/model.hpp"

namespace kgreason::llm {

struct ChatClientOptions {
    std::string base_url = "https://api.openai.com/v1";  // "/chat/completions" is appended
    std::string api_key;                                  // sent as a Bearer token when non-empty
    RetryPolicy retry{};
    std::chrono::seconds timeout{120};
};

// OpenAI-compatible chat-completions client. Each prompt is sent as one user
// message; usage comes from the response's "usage" block.
class ChatClient final : public LanguageModel {
public:
    explicit ChatClient(ChatClientOptions options);

    Completion complete(const std::string& prompt, const GenerationConfig& config) const override;

    // Request body for a prompt; exposed for wire-format tests.
    static std::string request_body(const std::string& prompt, const GenerationConfig& config);

private:
    ChatClientOptions options_;
};

// Name of the environment variable holding the API key.
inline constexpr const char* kApiKeyEnv = "KGREASON_API_KEY";

}  // namespace kgreason::llm
