#pragma once
// Per-question planning state: reasoning paths, memory and the exploration
// frontier.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgreason/kg/types.hpp"
#include "kgreason/llm/model.hpp"
#include "kgreason/recall/scorer.hpp"

namespace kgreason::planner {

struct Entity {
    kg::EntityId id;
    std::string label;
};

struct Question {
    std::string text;
    std::vector<Entity> topic_entities;

    // Throws std::invalid_argument when the text is blank, there are no topic
    // entities, or a topic entity lacks an id or label.
    void validate() const;
};

// One hop. The triple keeps its KG orientation; direction says which end the
// path entered from.
struct PathStep {
    kg::Triplet triple;
    kg::Direction direction = kg::Direction::outgoing;

    const kg::EntityId& from() const {
        return direction == kg::Direction::outgoing ? triple.subject : triple.object;
    }
    const kg::EntityId& to() const { return direction == kg::Direction::outgoing ? triple.object : triple.subject; }

    auto operator<=>(const PathStep&) const = default;
};

struct ReasoningPath {
    kg::EntityId origin;
    std::vector<PathStep> steps;

    const kg::EntityId& tail() const { return steps.empty() ? origin : steps.back().to(); }
    std::size_t length() const { return steps.size(); }
    bool contains(const kg::EntityId& e) const;
    ReasoningPath extended(PathStep step) const;

    auto operator<=>(const ReasoningPath&) const = default;
};

// Empty string when the path is linked, acyclic and within max_depth;
// otherwise a description of the first violation.
std::string path_violation(const ReasoningPath& path, std::size_t max_depth);

struct CandidateRelation {
    kg::EntityId entity;
    kg::RelationId relation;
    kg::Direction direction = kg::Direction::outgoing;

    auto operator<=>(const CandidateRelation&) const = default;
};

// Everything retrieved from the KG during the run.
struct Subgraph {
    std::set<kg::EntityId> entities;
    std::set<CandidateRelation> relations;
    std::set<kg::Triplet> triplets;

    std::size_t size() const { return entities.size() + relations.size() + triplets.size(); }
};

struct Memory {
    Subgraph subgraph;
    std::vector<ReasoningPath> paths;
    std::vector<std::string> status;  // one entry per sub-objective
};

// A path waiting for its tail relation to be expanded into entities.
struct PendingExtension {
    ReasoningPath path;
    kg::RelationId relation;
    kg::Direction direction = kg::Direction::outgoing;
};

struct Frontier {
    std::size_t iteration = 0;
    std::vector<ReasoningPath> active;            // paths continued this iteration
    std::vector<kg::EntityId> tail_entities;      // distinct tails of `active`, first-seen order
    std::vector<PendingExtension> tail_relations;  // after relation exploration
    // Every entity retrieved so far, keyed to the path that first reached it.
    std::map<kg::EntityId, ReasoningPath> candidate_pool;
    // (entity, relation, direction) triples already expanded.
    std::set<CandidateRelation> expanded;

    void set_active(std::vector<ReasoningPath> paths);
    void add_active(const ReasoningPath& path);
};

struct Verdict {
    bool sufficient = false;
    std::optional<std::string> answer;
    std::string reason;
};

struct ReflectionDecision {
    bool add = false;
    std::string reason;
    std::vector<kg::EntityId> backtrack_entities;
};

struct Ablations {
    bool no_guidance = false;
    bool no_memory = false;
    bool no_reflection = false;
    std::optional<std::size_t> fixed_breadth;

    bool any() const { return no_guidance || no_memory || no_reflection || fixed_breadth.has_value(); }
};

struct PlannerConfig {
    std::size_t max_depth = 4;
    Ablations ablations;
    llm::GenerationConfig generation;
    recall::RecallSettings recall;

    void validate() const;
};

// "A" values that mean the model could not answer yet.
bool is_insufficient_answer(std::string_view answer);

}  // namespace kgreason::planner
