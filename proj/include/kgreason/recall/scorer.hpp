#pragma once
// Relevance scoring used to shrink large candidate-entity sets before they
// reach the entity-selection prompt.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgreason/kg/types.hpp"

namespace kgreason::recall {

struct ScoredCandidate {
    kg::EntityId entity;
    std::string label;
    double score = 0.0;  // [0, 1]
};

class RelevanceScorer {
public:
    virtual ~RelevanceScorer() = default;
    // Deterministic score in [0, 1]. Throws std::invalid_argument when either
    // string is blank.
    virtual double score(std::string_view question, std::string_view label) const = 0;
};

// Cosine similarity of lowercase character-trigram multisets. Strings shorter
// than three characters count as a single gram.
class TrigramScorer final : public RelevanceScorer {
public:
    double score(std::string_view question, std::string_view label) const override;
};

// The k best candidates ordered by (score desc, label asc, id asc). The input
// order never matters.
std::vector<ScoredCandidate> top_k(const RelevanceScorer& scorer, std::string_view question,
                                   const std::vector<std::pair<kg::EntityId, std::string>>& candidates, std::size_t k);

struct RecallSettings {
    std::size_t threshold = 30;  // recall only fires when a candidate set is larger than this
    std::size_t k = 25;
};

}  // namespace kgreason::recall
