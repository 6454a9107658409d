#pragma once

#include <vector>

#include "kgreason/kg/types.hpp"

namespace kgreason::kg {

// The three query shapes the planner needs. Results are deduplicated and in
// ascending lexicographic order. Unknown entities give empty results.
// Implementations must be safe to call from several threads at once.
class KnowledgeGraph {
public:
    virtual ~KnowledgeGraph() = default;

    virtual std::vector<RelationId> search_relations(const EntityId& entity, Direction direction) const = 0;

    virtual std::vector<EntityId> search_entities(const EntityId& entity, const RelationId& relation,
                                                  Direction direction) const = 0;

    // First available human-readable name; the raw id when there is none.
    virtual EntityLabel resolve_label(const EntityId& entity) const = 0;
};

}  // namespace kgreason::kg
