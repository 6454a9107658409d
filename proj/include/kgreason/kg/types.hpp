#pragma once
// Core knowledge-graph value types shared by every backend.

#include <compare>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kgreason::kg {

// Opaque machine identifier ("m.0d05w3"). Literal objects (dates, numbers,
// names) travel through the same type; looks_like_mid() tells them apart.
struct EntityId {
    std::string value;

    EntityId() = default;
    explicit EntityId(std::string v) : value(std::move(v)) {}

    bool empty() const { return value.empty(); }
    auto operator<=>(const EntityId&) const = default;
};

// Dotted relation name ("government.government_office_or_title.office_holders").
struct RelationId {
    std::string value;

    RelationId() = default;
    explicit RelationId(std::string v) : value(std::move(v)) {}

    bool empty() const { return value.empty(); }
    auto operator<=>(const RelationId&) const = default;
};

enum class Direction { outgoing, incoming };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

struct Triplet {
    EntityId subject;
    RelationId relation;
    EntityId object;

    auto operator<=>(const Triplet&) const = default;
};

struct EntityLabel {
    EntityId entity;
    std::string label;
};

// Freebase mids and compound keys start with "m." or "g.".
bool looks_like_mid(std::string_view s);

// Relation ids may not contain whitespace and may not be empty.
bool valid_relation(std::string_view s);

// Thrown when a backend cannot be reached or answers with garbage.
class KgError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kgreason::kg

template <>
struct std::hash<kgreason::kg::EntityId> {
    size_t operator()(const kgreason::kg::EntityId& e) const noexcept {
        return std::hash<std::string>{}(e.value);
    }
};

template <>
struct std::hash<kgreason::kg::RelationId> {
    size_t operator()(const kgreason::kg::RelationId& r) const noexcept {
        return std::hash<std::string>{}(r.value);
    }
};
