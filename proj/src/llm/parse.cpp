#include "kgreason/llm/parse.hpp"

#include <algorithm>
#include <cctype>

namespace kgreason::llm {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && is_space(s[i])) ++i;
    return i;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::optional<uint32_t> read_hex4(std::string_view s, std::size_t i) {
    if (i + 4 > s.size()) return std::nullopt;
    uint32_t v = 0;
    for (std::size_t k = i; k < i + 4; ++k) {
        char c = s[k];
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<uint32_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<uint32_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') v |= static_cast<uint32_t>(c - 'A' + 10);
        else return std::nullopt;
    }
    return v;
}

// A quote closes a string only when followed by a separator; otherwise it is
// an apostrophe or stray quote inside the item ("Walsh's").
bool closes_item(std::string_view s, std::size_t after_quote, std::string_view separators) {
    auto j = skip_space(s, after_quote);
    return j >= s.size() || separators.find(s[j]) != std::string_view::npos;
}

enum class ScanResult { ok, unbalanced, not_a_list };

// Parses the list whose '[' is at s[open].
ScanResult scan_list(std::string_view s, std::size_t open, std::vector<std::string>& items) {
    items.clear();
    std::size_t i = open + 1;
    while (true) {
        i = skip_space(s, i);
        if (i >= s.size()) return ScanResult::unbalanced;
        char c = s[i];
        if (c == ']') return ScanResult::ok;
        if (c == ',') {  // empty slot or trailing comma
            ++i;
            continue;
        }
        std::string item;
        if (c == '"' || c == '\'') {
            const char quote = c;
            ++i;
            bool closed = false;
            while (i < s.size()) {
                char d = s[i];
                if (d == '\\' && i + 1 < s.size()) {
                    char e = s[i + 1];
                    switch (e) {
                        case 'n': item += '\n'; break;
                        case 't': item += '\t'; break;
                        case 'r': item += '\r'; break;
                        case 'b': item += '\b'; break;
                        case 'f': item += '\f'; break;
                        case 'u': {
                            auto cp = read_hex4(s, i + 2);
                            if (!cp) {
                                item += e;
                                break;
                            }
                            i += 4;
                            uint32_t code = *cp;
                            if (code >= 0xD800 && code < 0xDC00 && i + 3 < s.size() && s[i + 2] == '\\' &&
                                s[i + 3] == 'u') {
                                if (auto lo = read_hex4(s, i + 4); lo && *lo >= 0xDC00 && *lo < 0xE000) {
                                    code = 0x10000 + ((code - 0xD800) << 10) + (*lo - 0xDC00);
                                    i += 6;
                                }
                            }
                            append_utf8(item, code);
                            break;
                        }
                        default: item += e; break;
                    }
                    i += 2;
                    continue;
                }
                if (d == quote && closes_item(s, i + 1, ",]")) {
                    ++i;
                    closed = true;
                    break;
                }
                item += d;
                ++i;
            }
            if (!closed) return ScanResult::unbalanced;
            items.push_back(trim(item));
        } else {
            int depth = 0;
            std::size_t start = i;
            while (i < s.size()) {
                char d = s[i];
                if (d == '[') ++depth;
                else if (d == ']') {
                    if (depth == 0) break;
                    --depth;
                } else if (d == ',' && depth == 0) break;
                else if (d == '\n' && depth == 0 && i > start) {
                    // a bare item never spans lines; prose after '[' is not a list
                    auto j = skip_space(s, i);
                    if (j < s.size() && (s[j] == ',' || s[j] == ']')) break;
                    return ScanResult::not_a_list;
                }
                ++i;
            }
            if (i >= s.size()) return ScanResult::unbalanced;
            auto bare = trim(s.substr(start, i - start));
            if (!bare.empty()) items.push_back(std::move(bare));
        }
        i = skip_space(s, i);
        if (i >= s.size()) return ScanResult::unbalanced;
        if (s[i] == ',') {
            ++i;
            continue;
        }
        if (s[i] == ']') return ScanResult::ok;
        return ScanResult::not_a_list;
    }
}

// Balanced {...} span starting at s[open], honouring both quote styles.
std::optional<std::size_t> match_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    char in_string = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == in_string && (in_string == '"' || closes_item(s, i + 1, ",:}]"))) {
                in_string = 0;
            }
            continue;
        }
        if (c == '"') {
            in_string = c;
        } else if (c == '\'') {
            // only a string opener right after a structural character
            std::size_t k = i;
            while (k > open && is_space(s[k - 1])) --k;
            if (k > open && std::string_view("{[,:").find(s[k - 1]) != std::string_view::npos) in_string = c;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::nullopt;
}

// Converts single-quoted strings and Python literals to JSON.
std::string normalize_quotes(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 8);
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == '"') {
            out += c;
            ++i;
            while (i < s.size()) {
                out += s[i];
                if (s[i] == '\\' && i + 1 < s.size()) {
                    out += s[i + 1];
                    i += 2;
                    continue;
                }
                if (s[i] == '"') {
                    ++i;
                    break;
                }
                ++i;
            }
            continue;
        }
        if (c == '\'') {
            out += '"';
            ++i;
            while (i < s.size()) {
                char d = s[i];
                if (d == '\\' && i + 1 < s.size()) {
                    if (s[i + 1] == '\'') out += '\'';
                    else {
                        out += d;
                        out += s[i + 1];
                    }
                    i += 2;
                    continue;
                }
                if (d == '\'' && closes_item(s, i + 1, ",:}]")) {
                    ++i;
                    break;
                }
                if (d == '"') out += "\\\"";
                else out += d;
                ++i;
            }
            out += '"';
            continue;
        }
        auto word_at = [&](std::string_view w) {
            return s.substr(i, w.size()) == w &&
                   (i + w.size() >= s.size() || !std::isalnum(static_cast<unsigned char>(s[i + w.size()])));
        };
        if (word_at("True")) {
            out += "true";
            i += 4;
        } else if (word_at("False")) {
            out += "false";
            i += 5;
        } else if (word_at("None")) {
            out += "null";
            i += 4;
        } else {
            out += c;
            ++i;
        }
    }
    return out;
}

// Removes commas that directly precede a closing brace or bracket.
std::string drop_trailing_commas(std::string_view s) {
    std::string out;
    char in_string = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            out += c;
            if (c == '\\' && i + 1 < s.size()) out += s[++i];
            else if (c == '"') in_string = 0;
            continue;
        }
        if (c == '"') in_string = c;
        if (c == ',') {
            auto j = skip_space(s, i + 1);
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out += c;
    }
    return out;
}

}  // namespace

std::string_view to_string(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::no_list_found: return "no-list-found";
        case ParseErrorKind::unbalanced_brackets: return "unbalanced-brackets";
        case ParseErrorKind::no_object_found: return "no-object-found";
        case ParseErrorKind::malformed_json: return "malformed-json";
        case ParseErrorKind::missing_required_key: return "missing-required-key";
    }
    return "unknown";
}

std::vector<std::string> parse_list(std::string_view text) {
    bool saw_unbalanced = false;
    std::vector<std::string> items;
    for (auto open = text.find('['); open != std::string_view::npos; open = text.find('[', open + 1)) {
        switch (scan_list(text, open, items)) {
            case ScanResult::ok: return items;
            case ScanResult::unbalanced: saw_unbalanced = true; break;
            case ScanResult::not_a_list: break;
        }
    }
    if (saw_unbalanced) throw ParseError(ParseErrorKind::unbalanced_brackets, "list brackets are not balanced");
    throw ParseError(ParseErrorKind::no_list_found, "no bracketed list in model output");
}

std::string render_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += nlohmann::json(items[i]).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    }
    return out + "]";
}

nlohmann::json extract_json_object(std::string_view text) {
    bool saw_candidate = false;
    for (auto open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        auto close = match_brace(text, open);
        if (!close) {
            saw_candidate = true;
            continue;
        }
        saw_candidate = true;
        auto span = text.substr(open, *close - open + 1);
        for (int pass = 0; pass < 3; ++pass) {
            std::string attempt;
            if (pass == 0) attempt = std::string(span);
            else if (pass == 1) attempt = drop_trailing_commas(span);
            else attempt = drop_trailing_commas(normalize_quotes(span));
            auto doc = nlohmann::json::parse(attempt, nullptr, false);
            if (!doc.is_discarded() && doc.is_object()) return doc;
        }
    }
    if (saw_candidate) throw ParseError(ParseErrorKind::malformed_json, "model output contains malformed JSON");
    throw ParseError(ParseErrorKind::no_object_found, "no JSON object in model output");
}

nlohmann::json parse_json_object(std::string_view text, const std::set<std::string>& required_keys) {
    auto obj = extract_json_object(text);
    for (const auto& key : required_keys) {
        if (!obj.contains(key)) {
            throw ParseError(ParseErrorKind::missing_required_key, "missing required key \"" + key + "\"", key);
        }
    }
    return obj;
}

std::optional<bool> as_boolish(const nlohmann::json& value) {
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_number_integer()) {
        auto v = value.get<long long>();
        if (v == 0 || v == 1) return v == 1;
        return std::nullopt;
    }
    if (!value.is_string()) return std::nullopt;
    auto s = trim(value.get<std::string>());
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
    if (s == "yes" || s == "true" || s == "y") return true;
    if (s == "no" || s == "false" || s == "n") return false;
    return std::nullopt;
}

std::string as_text(const nlohmann::json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_null()) return {};
    return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace kgreason::llm
