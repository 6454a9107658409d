#include "kgreason/llm/scripted.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace kgreason::llm {

void GenerationConfig::validate() const {
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
}

uint64_t approx_tokens(std::string_view text) {
    uint64_t code_points = 0;
    for (unsigned char c : text) {
        if ((c & 0xC0) != 0x80) ++code_points;
    }
    return (code_points + 3) / 4;
}

ScriptRule ScriptRule::contains(std::string pattern, std::string response) {
    return {Kind::substring, std::move(pattern), std::move(response)};
}

ScriptRule ScriptRule::matches(std::string pattern, std::string response) {
    return {Kind::regex, std::move(pattern), std::move(response)};
}

ScriptedResponder::ScriptedResponder(std::vector<ScriptRule> rules, std::optional<std::string> fallback)
    : fallback_(std::move(fallback)) {
    rules_.reserve(rules.size());
    for (auto& r : rules) {
        Compiled c{std::move(r), std::nullopt};
        if (c.rule.kind == ScriptRule::Kind::regex) {
            try {
                c.re.emplace(c.rule.pattern, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw std::invalid_argument("bad script regex '" + c.rule.pattern + "': " + e.what());
            }
        }
        rules_.push_back(std::move(c));
    }
}

ScriptedResponder ScriptedResponder::from_json(std::string_view text) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw std::invalid_argument("script fixture is not valid JSON");

    const nlohmann::json* rules = &doc;
    std::optional<std::string> fallback;
    if (doc.is_object()) {
        if (!doc.contains("rules")) throw std::invalid_argument("script fixture has no \"rules\" array");
        rules = &doc["rules"];
        if (doc.contains("default") && doc["default"].is_string()) fallback = doc["default"].get<std::string>();
    }
    if (!rules->is_array()) throw std::invalid_argument("script rules must be an array");

    std::vector<ScriptRule> parsed;
    std::size_t index = 0;
    for (const auto& r : *rules) {
        if (!r.is_object() || !r.contains("match") || !r.contains("response") || !r["match"].is_string() ||
            !r["response"].is_string()) {
            throw std::invalid_argument("script rule " + std::to_string(index) + " needs string match/response");
        }
        auto match = r["match"].get<std::string>();
        bool is_regex = r.value("regex", false);
        if (match.starts_with("re:")) {
            match = match.substr(3);
            is_regex = true;
        }
        parsed.push_back({is_regex ? ScriptRule::Kind::regex : ScriptRule::Kind::substring, std::move(match),
                          r["response"].get<std::string>()});
        ++index;
    }
    return ScriptedResponder(std::move(parsed), std::move(fallback));
}

ScriptedResponder ScriptedResponder::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open script fixture: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::optional<std::string> ScriptedResponder::respond(const std::string& prompt) const {
    for (const auto& c : rules_) {
        bool hit = c.re ? std::regex_search(prompt, *c.re) : prompt.find(c.rule.pattern) != std::string::npos;
        if (hit) return c.rule.response;
    }
    return fallback_;
}

Completion ScriptedResponder::complete(const std::string& prompt, const GenerationConfig& config) const {
    if (prompt.empty()) throw LlmError(LlmErrorKind::invalid_request, "empty prompt");
    config.validate();
    auto start = std::chrono::steady_clock::now();
    auto text = respond(prompt);
    if (!text) throw LlmError(LlmErrorKind::no_matching_rule, "no scripted rule matches the prompt");
    Completion c;
    c.text = std::move(*text);
    c.usage = {approx_tokens(prompt), approx_tokens(c.text)};
    c.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return c;
}

}  // namespace kgreason::llm
