#pragma once
// Prompt templates loaded from text assets. Slots are written "{Name}" and
// filled in a single pass, so bound values are never re-expanded.

#include <array>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgreason::planner {

enum class PromptId { decompose, relation_select, entity_select, memory_update, answer, reflect, backtrack_select };

inline constexpr std::array kAllPrompts = {PromptId::decompose,     PromptId::relation_select, PromptId::entity_select,
                                           PromptId::memory_update, PromptId::answer,          PromptId::reflect,
                                           PromptId::backtrack_select};

// Asset file stem: A1, A2_1, A2_2, A3, A4_1_answer, A4_2_reflect, A4_2_select.
std::string_view template_name(PromptId id);
PromptId prompt_from_name(std::string_view name);

class PromptError : public std::runtime_error {
public:
    PromptError(const std::string& what, std::string placeholder = {})
        : std::runtime_error(what), placeholder_(std::move(placeholder)) {}
    const std::string& placeholder() const { return placeholder_; }

private:
    std::string placeholder_;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

class PromptLibrary {
public:
    // Reads "<name>.txt" for every template id. Trailing newlines are dropped.
    static PromptLibrary load(const std::filesystem::path& dir);
    // The directory configured at build time.
    static std::filesystem::path default_dir();

    void set(PromptId id, std::string text);
    const std::string& text(PromptId id) const;
    std::vector<std::string> placeholders(PromptId id) const;

    // Throws PromptError naming the first unbound placeholder.
    std::string render(PromptId id, const Bindings& bindings) const;

private:
    std::map<PromptId, std::string> templates_;
};

}  // namespace kgreason::planner
