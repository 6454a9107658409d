#pragma once
// Extraction of the list and JSON-object output contracts from free-form
// model text. Model output routinely wraps the payload in markdown fences or
// prose, uses single quotes, or leaves trailing commas; all of these are
// tolerated. Anything else surfaces as a ParseError, never as a crash.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kgreason::llm {

enum class ParseErrorKind { no_list_found, unbalanced_brackets, no_object_found, malformed_json, missing_required_key };

std::string_view to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, const std::string& what, std::string key = {})
        : std::runtime_error(what), kind_(kind), key_(std::move(key)) {}

    ParseErrorKind kind() const { return kind_; }
    // Set for missing_required_key.
    const std::string& key() const { return key_; }

private:
    ParseErrorKind kind_;
    std::string key_;
};

// Items of the first bracketed list, unquoted and trimmed, in order.
std::vector<std::string> parse_list(std::string_view text);

// Canonical rendering that parse_list inverts.
std::string render_list(const std::vector<std::string>& items);

// First balanced JSON object in the text.
nlohmann::json extract_json_object(std::string_view text);

// extract_json_object plus a case-sensitive presence check for every key.
nlohmann::json parse_json_object(std::string_view text, const std::set<std::string>& required_keys);

// "Yes"/"No", true/false, 1/0 and friends. nullopt when the value is none of these.
std::optional<bool> as_boolish(const nlohmann::json& value);

// String form of a JSON value: strings unwrapped, null as "", others dumped.
std::string as_text(const nlohmann::json& value);

}  // namespace kgreason::llm
