#include "kgreason/recall/embedding_scorer.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace kgreason::recall {

EmbeddingScorer::EmbeddingScorer(EmbeddingScorerOptions options) : options_(std::move(options)) {
    if (options_.url.empty()) throw std::invalid_argument("embedding endpoint URL is empty");
}

std::vector<double> EmbeddingScorer::embed(const std::string& text) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(text); it != cache_.end()) return it->second;
    }
    nlohmann::json body = {{"input", nlohmann::json::array({text})}};
    if (!options_.model.empty()) body["model"] = options_.model;

    HttpRequest req;
    req.url = options_.url;
    req.body = body.dump();
    req.content_type = "application/json";
    req.timeout = options_.timeout;
    if (!options_.api_key.empty()) req.headers["Authorization"] = "Bearer " + options_.api_key;
    auto res = http_post(req, options_.retry);

    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("data") || !doc["data"].is_array() || doc["data"].empty() ||
        !doc["data"][0].contains("embedding") || !doc["data"][0]["embedding"].is_array()) {
        throw std::runtime_error("embedding endpoint returned no vector");
    }
    std::vector<double> vec;
    for (const auto& v : doc["data"][0]["embedding"]) {
        if (!v.is_number()) throw std::runtime_error("embedding vector holds a non-number");
        vec.push_back(v.get<double>());
    }
    std::lock_guard lock(mutex_);
    cache_.emplace(text, vec);
    return vec;
}

double EmbeddingScorer::score(std::string_view question, std::string_view label) const {
    auto blank = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
    };
    if (blank(question) || blank(label)) throw std::invalid_argument("relevance score needs two non-blank strings");
    auto a = embed(std::string(question));
    auto b = embed(std::string(label));
    if (a.size() != b.size() || a.empty()) throw std::runtime_error("embedding dimensions disagree");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace kgreason::recall
