#pragma once

#include <map>
#include <mutex>

#include "kgreason/http.hpp"
#include "kgreason/recall/scorer.hpp"

namespace kgreason::recall {

struct EmbeddingScorerOptions {
    std::string url;  // full endpoint URL, e.g. http://localhost:8080/v1/embeddings
    std::string model;
    std::string api_key;
    RetryPolicy retry{};
    std::chrono::seconds timeout{30};
};

// Cosine similarity of vectors from an OpenAI-compatible embeddings endpoint
// (POST {"model", "input": [text]} -> {"data": [{"embedding": [...]}]}),
// clamped to [0, 1]. Vectors are memoised per text.
class EmbeddingScorer final : public RelevanceScorer {
public:
    explicit EmbeddingScorer(EmbeddingScorerOptions options);

    double score(std::string_view question, std::string_view label) const override;

private:
    std::vector<double> embed(const std::string& text) const;

    EmbeddingScorerOptions options_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::vector<double>> cache_;
};

}  // namespace kgreason::recall
