#pragma once
// In-memory triple store with subject and object indexes.
//
// Strings are interned to 32-bit ids; every triple is stored once and
// referenced from both indexes. Loading replaces the whole store.

#include <cstdint>
#include <filesystem>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgreason/kg/backend.hpp"

namespace kgreason::kg {

enum class TripleFormat { ntriples, tsv };

TripleFormat triple_format_from_string(std::string_view s);

// Malformed input; message carries "line N".
class LoadError : public std::runtime_error {
public:
    LoadError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline constexpr std::string_view kNameRelation = "type.object.name";
inline constexpr std::string_view kSameAsRelation = "http://www.w3.org/2002/07/owl#sameAs";

class TripleStore final : public KnowledgeGraph {
public:
    TripleStore() = default;

    std::size_t load(const std::filesystem::path& source, TripleFormat format);
    std::size_t load_text(std::string_view text, TripleFormat format);
    // Replaces the store with exactly these triples.
    void assign(std::span<const Triplet> triples);

    std::size_t size() const;
    std::vector<Triplet> triples() const;

    std::vector<RelationId> search_relations(const EntityId& entity, Direction direction) const override;
    std::vector<EntityId> search_entities(const EntityId& entity, const RelationId& relation,
                                          Direction direction) const override;
    EntityLabel resolve_label(const EntityId& entity) const override;

private:
    struct Row {
        uint32_t subject;
        uint32_t relation;
        uint32_t object;
    };

    uint32_t intern(const std::string& s);
    const uint32_t* find_id(const std::string& s) const;
    void insert(const Triplet& t);
    void clear();

    mutable std::shared_mutex mutex_;
    std::vector<std::string> strings_;
    std::unordered_map<std::string, uint32_t> ids_;
    std::vector<Row> rows_;
    std::unordered_map<uint32_t, std::vector<uint32_t>> by_subject_;
    std::unordered_map<uint32_t, std::vector<uint32_t>> by_object_;
};

// Parses one N-Triples line ("<s> <p> <o> ." or "<s> <p> \"lit\"@en .").
// Freebase namespace prefixes are stripped. Returns false on blank/comment lines.
bool parse_ntriples_line(std::string_view line, Triplet& out);

}  // namespace kgreason::kg
