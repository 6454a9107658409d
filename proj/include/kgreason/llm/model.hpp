#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kgreason::llm {

// Sampling settings sent with every completion.
struct GenerationConfig {
    double temperature = 0.3;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;
    int max_tokens = 1024;
    std::string model = "gpt-3.5-turbo";

    // Throws std::invalid_argument on a negative temperature or max_tokens < 1.
    void validate() const;
};

struct Usage {
    uint64_t input_tokens = 0;
    uint64_t output_tokens = 0;

    uint64_t total() const { return input_tokens + output_tokens; }
    Usage& operator+=(const Usage& o) {
        input_tokens += o.input_tokens;
        output_tokens += o.output_tokens;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

struct Completion {
    std::string text;
    Usage usage;
    std::chrono::microseconds latency{0};
};

enum class LlmErrorKind { transport, rate_limited, no_matching_rule, bad_response, invalid_request };

class LlmError : public std::runtime_error {
public:
    LlmError(LlmErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    LlmErrorKind kind() const { return kind_; }

private:
    LlmErrorKind kind_;
};

// Single-turn completion. Implementations are shared between concurrent
// question runs and must not keep per-run state.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual Completion complete(const std::string& prompt, const GenerationConfig& config) const = 0;
};

// ceil(code points / 4): the fixed token estimate used where no tokenizer
// reports usage.
uint64_t approx_tokens(std::string_view text);

}  // namespace kgreason::llm
