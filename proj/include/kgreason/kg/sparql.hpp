#pragma once
// Freebase SPARQL query templates and a caching endpoint client.

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kgreason/http.hpp"
#include "kgreason/kg/backend.hpp"

namespace kgreason::kg {

enum class SparqlTemplate { relation_out, relation_in, entity_out, entity_in, name };

struct SparqlBindings {
    std::optional<std::string> mid;
    std::optional<std::string> relation;
};

// Substitutes the bindings into the fixed query text. Throws
// std::invalid_argument naming the missing placeholder, or when a binding
// contains characters that could escape the query.
std::string render_sparql(SparqlTemplate tmpl, const SparqlBindings& bindings);

SparqlTemplate relation_template(Direction d);
SparqlTemplate entity_template(Direction d);

inline constexpr std::string_view kFreebaseNs = "http://rdf.freebase.com/ns/";

struct SparqlClientOptions {
    std::string endpoint;  // full URL, e.g. http://localhost:8890/sparql
    RetryPolicy retry{};
    std::chrono::seconds timeout{60};
};

// Speaks the SPARQL 1.1 protocol: POST application/sparql-query, reads
// application/sparql-results+json. Results are cached per rendered query
// for the lifetime of the client.
class SparqlClient final : public KnowledgeGraph {
public:
    explicit SparqlClient(SparqlClientOptions options);

    std::vector<RelationId> search_relations(const EntityId& entity, Direction direction) const override;
    std::vector<EntityId> search_entities(const EntityId& entity, const RelationId& relation,
                                          Direction direction) const override;
    EntityLabel resolve_label(const EntityId& entity) const override;

    std::size_t cache_size() const;
    std::size_t requests_sent() const;

private:
    struct Value {
        std::string text;
        std::string lang;
    };

    std::vector<Value> select(const std::string& query, const std::string& var) const;

    SparqlClientOptions options_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::vector<Value>> cache_;
    mutable std::size_t requests_ = 0;
};

}  // namespace kgreason::kg
