#pragma once
// Deterministic stand-in for a chat model. Each rule pairs a matcher over
// the prompt text with a canned response; the first matching rule wins.

#include <filesystem>
#include <optional>
#include <regex>
#include <vector>

#include "kgreason/llm/model.hpp"

namespace kgreason::llm {

struct ScriptRule {
    enum class Kind { substring, regex };

    Kind kind = Kind::substring;
    std::string pattern;
    std::string response;

    static ScriptRule contains(std::string pattern, std::string response);
    static ScriptRule matches(std::string pattern, std::string response);
};

class ScriptedResponder final : public LanguageModel {
public:
    explicit ScriptedResponder(std::vector<ScriptRule> rules, std::optional<std::string> fallback = std::nullopt);

    // JSON fixture: {"rules": [{"match": "...", "regex": bool?, "response": "..."}], "default": "..."?}
    // or a bare array of rules. A match string of the form "re:<pattern>" is a regex.
    static ScriptedResponder from_file(const std::filesystem::path& path);
    static ScriptedResponder from_json(std::string_view text);

    Completion complete(const std::string& prompt, const GenerationConfig& config) const override;

    // The response for a prompt, or nullopt when nothing matches and no default is set.
    std::optional<std::string> respond(const std::string& prompt) const;

    std::size_t rule_count() const { return rules_.size(); }

private:
    struct Compiled {
        ScriptRule rule;
        std::optional<std::regex> re;
    };

    std::vector<Compiled> rules_;
    std::optional<std::string> fallback_;
};

}  // namespace kgreason::llm
