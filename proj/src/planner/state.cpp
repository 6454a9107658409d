#include "kgreason/planner/state.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace kgreason::planner {

void Question::validate() const {
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
        throw std::invalid_argument("question text is blank");
    }
    if (topic_entities.empty()) throw std::invalid_argument("question has no topic entities");
    for (const auto& t : topic_entities) {
        if (t.id.empty()) throw std::invalid_argument("topic entity with empty id");
        if (t.label.empty()) throw std::invalid_argument("topic entity " + t.id.value + " has no label");
    }
}

bool ReasoningPath::contains(const kg::EntityId& e) const {
    if (origin == e) return true;
    return std::any_of(steps.begin(), steps.end(), [&](const PathStep& s) { return s.to() == e; });
}

ReasoningPath ReasoningPath::extended(PathStep step) const {
    ReasoningPath p = *this;
    p.steps.push_back(std::move(step));
    return p;
}

std::string path_violation(const ReasoningPath& path, std::size_t max_depth) {
    if (path.origin.empty()) return "path has no origin";
    if (path.length() > max_depth) {
        return "path length " + std::to_string(path.length()) + " exceeds max depth " + std::to_string(max_depth);
    }
    std::set<kg::EntityId> seen{path.origin};
    const kg::EntityId* at = &path.origin;
    for (std::size_t i = 0; i < path.steps.size(); ++i) {
        const auto& s = path.steps[i];
        if (s.triple.subject.empty() || s.triple.relation.empty() || s.triple.object.empty()) {
            return "step " + std::to_string(i) + " has an empty field";
        }
        if (s.from() != *at) return "step " + std::to_string(i) + " is not linked to the previous step";
        if (!seen.insert(s.to()).second) return "entity " + s.to().value + " repeats at step " + std::to_string(i);
        at = &s.to();
    }
    return {};
}

void Frontier::set_active(std::vector<ReasoningPath> paths) {
    active.clear();
    tail_entities.clear();
    for (auto& p : paths) add_active(p);
}

void Frontier::add_active(const ReasoningPath& path) {
    if (std::find(active.begin(), active.end(), path) != active.end()) return;
    active.push_back(path);
    if (std::find(tail_entities.begin(), tail_entities.end(), path.tail()) == tail_entities.end()) {
        tail_entities.push_back(path.tail());
    }
}

void PlannerConfig::validate() const {
    if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (ablations.fixed_breadth && *ablations.fixed_breadth < 1) {
        throw std::invalid_argument("fixed_breadth must be >= 1");
    }
    if (recall.k < 1) throw std::invalid_argument("recall.k must be >= 1");
    generation.validate();
}

bool is_insufficient_answer(std::string_view answer) {
    while (!answer.empty() && std::isspace(static_cast<unsigned char>(answer.front()))) answer.remove_prefix(1);
    while (!answer.empty() && std::isspace(static_cast<unsigned char>(answer.back()))) answer.remove_suffix(1);
    std::string lower(answer);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower.empty() || lower == "unknown" || lower == "insufficient" || lower == "no";
}

}  // namespace kgreason::planner
