#include "kgreason/kg/sparql.hpp"

#include <algorithm>
#include <cctype>

namespace kgreason::kg {

namespace {

constexpr std::string_view kPrefix = "PREFIX ns: <http://rdf.freebase.com/ns/>\n";

// Freebase ids and relation names are dotted identifiers; anything else could
// break out of the "ns:" prefixed name.
bool safe_name(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '.' || c == '_' || c == '-';
    });
}

const std::string& need(const std::optional<std::string>& v, const char* name) {
    if (!v) throw std::invalid_argument(std::string("missing SPARQL binding: ") + name);
    if (!safe_name(*v)) throw std::invalid_argument(std::string("unsafe SPARQL binding for ") + name + ": " + *v);
    return *v;
}

}  // namespace

std::string render_sparql(SparqlTemplate tmpl, const SparqlBindings& b) {
    std::string q(kPrefix);
    switch (tmpl) {
        case SparqlTemplate::relation_out:
            q += "SELECT DISTINCT ?relation\nWHERE {\n  ns:" + need(b.mid, "mid") + " ?relation ?x .\n}";
            break;
        case SparqlTemplate::relation_in:
            q += "SELECT DISTINCT ?relation\nWHERE {\n  ?x ?relation ns:" + need(b.mid, "mid") + " .\n}";
            break;
        case SparqlTemplate::entity_out: {
            const auto& mid = need(b.mid, "mid");
            const auto& rel = need(b.relation, "relation");
            q += "SELECT ?tailEntity\nWHERE {\n  ns:" + mid + " ns:" + rel + " ?tailEntity .\n}";
            break;
        }
        case SparqlTemplate::entity_in: {
            const auto& mid = need(b.mid, "mid");
            const auto& rel = need(b.relation, "relation");
            q += "SELECT ?tailEntity\nWHERE {\n  ?tailEntity ns:" + rel + " ns:" + mid + " .\n}";
            break;
        }
        case SparqlTemplate::name: {
            const auto& mid = need(b.mid, "mid");
            q += "SELECT DISTINCT ?tailEntity\n"
                 "WHERE {\n"
                 "  {\n"
                 "    ?entity ns:type.object.name ?tailEntity .\n"
                 "    FILTER(?entity = ns:" + mid + ")\n"
                 "  }\n"
                 "  UNION\n"
                 "  {\n"
                 "    ?entity <http://www.w3.org/2002/07/owl#sameAs> ?tailEntity .\n"
                 "    FILTER(?entity = ns:" + mid + ")\n"
                 "  }\n"
                 "}";
            break;
        }
    }
    return q;
}

SparqlTemplate relation_template(Direction d) {
    return d == Direction::outgoing ? SparqlTemplate::relation_out : SparqlTemplate::relation_in;
}

SparqlTemplate entity_template(Direction d) {
    return d == Direction::outgoing ? SparqlTemplate::entity_out : SparqlTemplate::entity_in;
}

}  // namespace kgreason::kg
