#include <algorithm>

#include "json.hpp"
#include "kgreason/kg/sparql.hpp"

namespace kgreason::kg {

namespace {

std::string strip_ns(const std::string& uri) {
    if (uri.starts_with(kFreebaseNs)) return uri.substr(kFreebaseNs.size());
    return uri;
}

}  // namespace

SparqlClient::SparqlClient(SparqlClientOptions options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw std::invalid_argument("SPARQL endpoint URL is empty");
}

std::vector<SparqlClient::Value> SparqlClient::select(const std::string& query, const std::string& var) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(query); it != cache_.end()) return it->second;
        ++requests_;
    }

    HttpRequest req;
    req.url = options_.endpoint;
    req.body = query;
    req.content_type = "application/sparql-query";
    req.headers["Accept"] = "application/sparql-results+json";
    req.timeout = options_.timeout;

    HttpResponse res;
    try {
        res = http_post(req, options_.retry);
    } catch (const HttpError& e) {
        throw KgError(std::string("SPARQL endpoint unreachable: ") + e.what());
    }

    auto doc = nlohmann::json::parse(res.body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("results") || !doc["results"].contains("bindings")) {
        throw KgError("SPARQL endpoint returned a non-JSON or malformed result document");
    }

    std::vector<Value> values;
    for (const auto& row : doc["results"]["bindings"]) {
        if (!row.contains(var)) continue;
        const auto& cell = row[var];
        Value v;
        v.text = cell.value("value", "");
        if (cell.value("type", "") == "uri") v.text = strip_ns(v.text);
        v.lang = cell.value("xml:lang", "");
        if (!v.text.empty()) values.push_back(std::move(v));
    }

    std::lock_guard lock(mutex_);
    cache_.emplace(query, values);
    return values;
}

std::vector<RelationId> SparqlClient::search_relations(const EntityId& entity, Direction direction) const {
    if (!looks_like_mid(entity.value)) return {};
    auto values = select(render_sparql(relation_template(direction), {entity.value, std::nullopt}), "relation");
    std::vector<RelationId> out;
    for (auto& v : values) {
        if (valid_relation(v.text)) out.emplace_back(std::move(v.text));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<EntityId> SparqlClient::search_entities(const EntityId& entity, const RelationId& relation,
                                                    Direction direction) const {
    if (!looks_like_mid(entity.value)) return {};
    auto values = select(render_sparql(entity_template(direction), {entity.value, relation.value}), "tailEntity");
    std::vector<EntityId> out;
    for (auto& v : values) out.emplace_back(std::move(v.text));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

EntityLabel SparqlClient::resolve_label(const EntityId& entity) const {
    if (!looks_like_mid(entity.value)) return {entity, entity.value};
    auto values = select(render_sparql(SparqlTemplate::name, {entity.value, std::nullopt}), "tailEntity");
    if (values.empty()) return {entity, entity.value};
    // English first, then untagged, then the smallest value for determinism.
    auto rank = [](const Value& v) { return v.lang == "en" ? 0 : v.lang.empty() ? 1 : 2; };
    auto best = std::min_element(values.begin(), values.end(), [&](const Value& a, const Value& b) {
        return std::pair(rank(a), a.text) < std::pair(rank(b), b.text);
    });
    return {entity, best->text};
}

std::size_t SparqlClient::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::size_t SparqlClient::requests_sent() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

}  // namespace kgreason::kg
