#include "kgreason/recall/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace kgreason::recall {

namespace {

std::string lowered_trimmed(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::map<std::string_view, int> trigrams(std::string_view s) {
    std::map<std::string_view, int> grams;
    if (s.size() < 3) {
        grams[s] = 1;
        return grams;
    }
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) ++grams[s.substr(i, 3)];
    return grams;
}

}  // namespace

double TrigramScorer::score(std::string_view question, std::string_view label) const {
    auto q = lowered_trimmed(question);
    auto l = lowered_trimmed(label);
    if (q.empty() || l.empty()) throw std::invalid_argument("relevance score needs two non-blank strings");
    auto a = trigrams(q);
    auto b = trigrams(l);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [g, n] : a) {
        na += double(n) * n;
        if (auto it = b.find(g); it != b.end()) dot += double(n) * it->second;
    }
    for (const auto& [g, n] : b) nb += double(n) * n;
    double s = dot / std::sqrt(na * nb);
    return std::clamp(s, 0.0, 1.0);
}

std::vector<ScoredCandidate> top_k(const RelevanceScorer& scorer, std::string_view question,
                                   const std::vector<std::pair<kg::EntityId, std::string>>& candidates,
                                   std::size_t k) {
    if (k == 0) throw std::invalid_argument("top_k needs k >= 1");
    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.size());
    for (const auto& [id, label] : candidates) {
        double s = 0.0;
        try {
            s = scorer.score(question, label);
        } catch (const std::invalid_argument&) {
            s = 0.0;  // blank labels are never relevant
        }
        scored.push_back({id, label, s});
    }
    auto better = [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.label != b.label) return a.label < b.label;
        return a.entity < b.entity;
    };
    auto n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
    scored.resize(n);
    return scored;
}

}  // namespace kgreason::recall
