#include <random>
#include <set>
#include <thread>

#include "doctest.h"
#include "kgreason/kg/triple_store.hpp"
#include "support.hpp"

using namespace kgreason;
using kg::Direction;
using kg::EntityId;
using kg::RelationId;

namespace {

std::vector<std::string> names(const std::vector<RelationId>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.value);
    return out;
}

std::vector<std::string> names(const std::vector<EntityId>& es) {
    std::vector<std::string> out;
    for (const auto& e : es) out.push_back(e.value);
    return out;
}

}  // namespace

TEST_SUITE("kg") {

TEST_CASE("identifier helpers") {
    CHECK(kg::looks_like_mid("m.0d05w3"));
    CHECK(kg::looks_like_mid("g.11b6"));
    CHECK_FALSE(kg::looks_like_mid("m."));
    CHECK_FALSE(kg::looks_like_mid("1958-08-06"));
    CHECK(kg::valid_relation("film.film.story_by"));
    CHECK_FALSE(kg::valid_relation("film film"));
    CHECK_FALSE(kg::valid_relation(""));
    CHECK(kg::direction_from_string(kg::to_string(Direction::incoming)) == Direction::incoming);
    CHECK_THROWS_AS(kg::direction_from_string("sideways"), std::invalid_argument);
}

TEST_CASE("panama fixture answers the documented queries") {
    auto store = testing::panama_store();
    auto& s = *store;
    CHECK(s.size() == 29);
    CHECK(names(s.search_relations(EntityId("m.pres_panama"), Direction::outgoing)) ==
          std::vector<std::string>{"government.government_office_or_title.jurisdiction",
                                   "government.government_office_or_title.office_holders"});
    CHECK(names(s.search_entities(EntityId("m.pres_panama"),
                                  RelationId("government.government_office_or_title.office_holders"),
                                  Direction::outgoing)) == std::vector<std::string>{"m.jc_varela"});
    CHECK(names(s.search_entities(EntityId("m.panama"), RelationId("location.location.containedby"),
                                  Direction::incoming)) == std::vector<std::string>{"m.panama_canal", "m.panama_city"});
    CHECK(s.resolve_label(EntityId("m.jc_varela")).label == "Juan Carlos Varela");
    CHECK(s.resolve_label(EntityId("m.pres_panama")).label == "m.pres_panama");
    CHECK(s.search_relations(EntityId("m.nowhere"), Direction::outgoing).empty());
}

TEST_CASE("tsv loading reports the failing line") {
    kg::TripleStore s;
    CHECK(s.load_text("# comment\n\na\tr.x\tb\n", kg::TripleFormat::tsv) == 1);
    try {
        s.load_text("a\tr.x\tb\nbroken line\n", kg::TripleFormat::tsv);
        FAIL("expected LoadError");
    } catch (const kg::LoadError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(s.load_text("a\tbad rel\tb\n", kg::TripleFormat::tsv), kg::LoadError);
    CHECK_THROWS_AS(s.load_text("a\t\tb\n", kg::TripleFormat::tsv), kg::LoadError);
    // a failed load leaves the previous contents in place
    CHECK(s.size() == 1);
    CHECK_THROWS_AS(s.load(testing::data_dir() / "missing.tsv", kg::TripleFormat::tsv), std::runtime_error);
}

TEST_CASE("n-triples loading strips the namespace and keeps literal text") {
    kg::TripleStore s;
    auto text =
        "<http://rdf.freebase.com/ns/m.x> <http://rdf.freebase.com/ns/type.object.name> \"Caf\xc3\xa9 \\\"X\\\"\"@en .\n"
        "<http://rdf.freebase.com/ns/m.x> <http://rdf.freebase.com/ns/location.location.containedby> "
        "<http://rdf.freebase.com/ns/m.y> .\n"
        "<http://rdf.freebase.com/ns/m.y> <http://www.w3.org/2002/07/owl#sameAs> \"Y Town\" .\n"
        "<http://rdf.freebase.com/ns/m.z> <http://rdf.freebase.com/ns/film.film.initial_release_date> "
        "\"1958-08-06\"^^<http://www.w3.org/2001/XMLSchema#date> .\n";
    CHECK(s.load_text(text, kg::TripleFormat::ntriples) == 4);
    CHECK(names(s.search_entities(EntityId("m.x"), RelationId("location.location.containedby"), Direction::outgoing)) ==
          std::vector<std::string>{"m.y"});
    CHECK(s.resolve_label(EntityId("m.y")).label == "Y Town");
    CHECK(names(s.search_entities(EntityId("m.z"), RelationId("film.film.initial_release_date"),
                                  Direction::outgoing)) == std::vector<std::string>{"1958-08-06"});
    CHECK_THROWS_AS(s.load_text("<a> <b> .\n", kg::TripleFormat::ntriples), kg::LoadError);
    CHECK_THROWS_AS(s.load_text("<a> <b> <c>\n", kg::TripleFormat::ntriples), kg::LoadError);
    CHECK(kg::triple_format_from_string("nt") == kg::TripleFormat::ntriples);
    CHECK_THROWS_AS(kg::triple_format_from_string("csv"), std::invalid_argument);
}

TEST_CASE("name triples win over sameAs, first loaded wins") {
    kg::TripleStore s;
    std::vector<kg::Triplet> t = {
        {EntityId("m.a"), RelationId(std::string(kg::kSameAsRelation)), EntityId("Alias")},
        {EntityId("m.a"), RelationId(std::string(kg::kNameRelation)), EntityId("First")},
        {EntityId("m.a"), RelationId(std::string(kg::kNameRelation)), EntityId("Second")},
        {EntityId("m.b"), RelationId(std::string(kg::kSameAsRelation)), EntityId("Only Alias")},
    };
    s.assign(t);
    CHECK(s.resolve_label(EntityId("m.a")).label == "First");
    CHECK(s.resolve_label(EntityId("m.b")).label == "Only Alias");
}

TEST_CASE("concurrent readers see consistent results") {
    auto store = testing::panama_store();
    auto& s = *store;
    std::atomic<int> mismatches{0};
    std::vector<std::jthread> readers;
    for (int i = 0; i < 4; ++i) {
        readers.emplace_back([&] {
            for (int k = 0; k < 500; ++k) {
                if (s.search_relations(EntityId("m.pres_panama"), Direction::outgoing).size() != 2) ++mismatches;
            }
        });
    }
    readers.clear();
    CHECK(mismatches == 0);
}

TEST_CASE("queries agree with a full scan on random graphs") {
    std::mt19937_64 rng(20240611);
    for (int graph = 0; graph < 20; ++graph) {
        auto g = testing::random_graph(rng, 300);
        kg::TripleStore s;
        s.assign(g.triples);
        for (const auto& e : g.entities) {
            for (auto d : {Direction::outgoing, Direction::incoming}) {
                std::set<std::string> rels;
                for (const auto& t : g.triples) {
                    if ((d == Direction::outgoing ? t.subject : t.object) == e) rels.insert(t.relation.value);
                }
                CHECK(names(s.search_relations(e, d)) == std::vector<std::string>(rels.begin(), rels.end()));
                for (const auto& r : rels) {
                    std::set<std::string> ents;
                    for (const auto& t : g.triples) {
                        if (t.relation.value != r) continue;
                        if (d == Direction::outgoing && t.subject == e) ents.insert(t.object.value);
                        if (d == Direction::incoming && t.object == e) ents.insert(t.subject.value);
                    }
                    CHECK(names(s.search_entities(e, RelationId(r), d)) ==
                          std::vector<std::string>(ents.begin(), ents.end()));
                }
            }
        }
    }
}

}  // TEST_SUITE
