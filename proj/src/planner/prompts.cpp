#include "kgreason/planner/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kgreason::planner {

namespace {

bool slot_char(char c, bool first) {
    bool alpha = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
    return first ? alpha : alpha || c == ' ' || c == '-' || c == '_';
}

// Visits text, calling on_text for literal runs and on_slot for "{Name}".
template <typename Text, typename Slot>
void scan_slots(const std::string& tmpl, Text on_text, Slot on_slot) {
    std::size_t i = 0, literal = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{' && i + 1 < tmpl.size() && slot_char(tmpl[i + 1], true)) {
            std::size_t j = i + 1;
            while (j < tmpl.size() && slot_char(tmpl[j], false)) ++j;
            if (j < tmpl.size() && tmpl[j] == '}') {
                on_text(std::string_view(tmpl).substr(literal, i - literal));
                on_slot(std::string_view(tmpl).substr(i + 1, j - i - 1));
                i = literal = j + 1;
                continue;
            }
        }
        ++i;
    }
    on_text(std::string_view(tmpl).substr(literal));
}

}  // namespace

std::string_view template_name(PromptId id) {
    switch (id) {
        case PromptId::decompose: return "A1";
        case PromptId::relation_select: return "A2_1";
        case PromptId::entity_select: return "A2_2";
        case PromptId::memory_update: return "A3";
        case PromptId::answer: return "A4_1_answer";
        case PromptId::reflect: return "A4_2_reflect";
        case PromptId::backtrack_select: return "A4_2_select";
    }
    return "?";
}

PromptId prompt_from_name(std::string_view name) {
    for (auto id : kAllPrompts) {
        if (template_name(id) == name) return id;
    }
    throw std::invalid_argument("unknown prompt template: " + std::string(name));
}

std::filesystem::path PromptLibrary::default_dir() {
#ifdef KGREASON_PROMPT_DIR
    return KGREASON_PROMPT_DIR;
#else
    return "prompts";
#endif
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (auto id : kAllPrompts) {
        auto path = dir / (std::string(template_name(id)) + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw PromptError("missing prompt template file: " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        auto text = buf.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        lib.set(id, std::move(text));
    }
    return lib;
}

void PromptLibrary::set(PromptId id, std::string text) { templates_[id] = std::move(text); }

const std::string& PromptLibrary::text(PromptId id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw PromptError("prompt template not loaded: " + std::string(template_name(id)));
    return it->second;
}

std::vector<std::string> PromptLibrary::placeholders(PromptId id) const {
    std::vector<std::string> names;
    scan_slots(text(id), [](std::string_view) {}, [&](std::string_view slot) {
        if (std::find(names.begin(), names.end(), slot) == names.end()) names.emplace_back(slot);
    });
    return names;
}

std::string PromptLibrary::render(PromptId id, const Bindings& bindings) const {
    const auto& tmpl = text(id);
    std::string out;
    out.reserve(tmpl.size() + 256);
    scan_slots(tmpl, [&](std::string_view lit) { out += lit; }, [&](std::string_view slot) {
        auto it = bindings.find(slot);
        if (it == bindings.end()) {
            throw PromptError("missing prompt binding \"" + std::string(slot) + "\" for template " +
                                  std::string(template_name(id)),
                              std::string(slot));
        }
        out += it->second;
    });
    return out;
}

}  // namespace kgreason::planner
