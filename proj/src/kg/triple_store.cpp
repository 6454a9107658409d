#include "kgreason/kg/triple_store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

namespace kgreason::kg {

namespace {

constexpr std::string_view kFreebasePrefix = "<http://rdf.freebase.com/ns/";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Reads an IRI or literal term starting at pos; advances pos past it.
bool read_term(std::string_view line, std::size_t& pos, std::string& out) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) return false;
    if (line[pos] == '<') {
        auto close = line.find('>', pos);
        if (close == std::string_view::npos) return false;
        auto iri = line.substr(pos, close - pos + 1);
        if (iri.starts_with(kFreebasePrefix)) {
            out = std::string(iri.substr(kFreebasePrefix.size(), iri.size() - kFreebasePrefix.size() - 1));
        } else {
            out = std::string(iri.substr(1, iri.size() - 2));
        }
        pos = close + 1;
        return !out.empty();
    }
    if (line[pos] == '"') {
        out.clear();
        ++pos;
        while (pos < line.size() && line[pos] != '"') {
            char c = line[pos];
            if (c == '\\' && pos + 1 < line.size()) {
                char n = line[++pos];
                switch (n) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    default: out += n; break;
                }
            } else {
                out += c;
            }
            ++pos;
        }
        if (pos >= line.size()) return false;
        ++pos;
        // language tag or datatype
        if (pos < line.size() && line[pos] == '@') {
            while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        } else if (line.substr(pos).starts_with("^^")) {
            pos += 2;
            std::string ignored;
            if (!read_term(line, pos, ignored)) return false;
        }
        return !out.empty();
    }
    return false;
}

}  // namespace

LoadError::LoadError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

TripleFormat triple_format_from_string(std::string_view s) {
    if (s == "ntriples" || s == "nt") return TripleFormat::ntriples;
    if (s == "tsv" || s == "tab") return TripleFormat::tsv;
    throw std::invalid_argument("unsupported triple format: " + std::string(s) + " (expected ntriples or tsv)");
}

bool parse_ntriples_line(std::string_view line, Triplet& out) {
    line = trim(line);
    if (line.empty() || line.front() == '#') return false;
    std::size_t pos = 0;
    std::string s, p, o;
    if (!read_term(line, pos, s) || !read_term(line, pos, p) || !read_term(line, pos, o)) {
        throw std::invalid_argument("expected three N-Triples terms");
    }
    auto rest = trim(line.substr(pos));
    if (rest != ".") throw std::invalid_argument("missing terminating '.'");
    out = Triplet{EntityId(std::move(s)), RelationId(std::move(p)), EntityId(std::move(o))};
    return true;
}

std::size_t TripleStore::load(const std::filesystem::path& source, TripleFormat format) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open triple file: " + source.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_text(buf.str(), format);
}

std::size_t TripleStore::load_text(std::string_view text, TripleFormat format) {
    std::vector<Triplet> parsed;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (format == TripleFormat::ntriples) {
            Triplet t;
            try {
                if (!parse_ntriples_line(line, t)) continue;
            } catch (const std::invalid_argument& e) {
                throw LoadError(line_no, e.what());
            }
            if (!valid_relation(t.relation.value)) throw LoadError(line_no, "relation contains whitespace");
            parsed.push_back(std::move(t));
            continue;
        }

        if (trim(line).empty() || line.front() == '#') continue;
        std::vector<std::string_view> fields;
        std::size_t f = 0;
        while (true) {
            auto tab = line.find('\t', f);
            fields.push_back(line.substr(f, tab == std::string_view::npos ? std::string_view::npos : tab - f));
            if (tab == std::string_view::npos) break;
            f = tab + 1;
        }
        if (fields.size() != 3) {
            throw LoadError(line_no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        }
        for (auto& field : fields) field = trim(field);
        if (fields[0].empty() || fields[1].empty() || fields[2].empty()) throw LoadError(line_no, "empty field");
        if (!valid_relation(fields[1])) throw LoadError(line_no, "relation contains whitespace");
        parsed.push_back(Triplet{EntityId(std::string(fields[0])), RelationId(std::string(fields[1])),
                                 EntityId(std::string(fields[2]))});
    }

    std::unique_lock lock(mutex_);
    clear();
    for (const auto& t : parsed) insert(t);
    return rows_.size();
}

void TripleStore::assign(std::span<const Triplet> triples) {
    std::unique_lock lock(mutex_);
    clear();
    for (const auto& t : triples) insert(t);
}

std::size_t TripleStore::size() const {
    std::shared_lock lock(mutex_);
    return rows_.size();
}

std::vector<Triplet> TripleStore::triples() const {
    std::shared_lock lock(mutex_);
    std::vector<Triplet> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) {
        out.push_back({EntityId(strings_[r.subject]), RelationId(strings_[r.relation]), EntityId(strings_[r.object])});
    }
    return out;
}

void TripleStore::clear() {
    strings_.clear();
    ids_.clear();
    rows_.clear();
    by_subject_.clear();
    by_object_.clear();
}

uint32_t TripleStore::intern(const std::string& s) {
    auto [it, inserted] = ids_.try_emplace(s, static_cast<uint32_t>(strings_.size()));
    if (inserted) strings_.push_back(s);
    return it->second;
}

const uint32_t* TripleStore::find_id(const std::string& s) const {
    auto it = ids_.find(s);
    return it == ids_.end() ? nullptr : &it->second;
}

void TripleStore::insert(const Triplet& t) {
    Row row{intern(t.subject.value), intern(t.relation.value), intern(t.object.value)};
    auto idx = static_cast<uint32_t>(rows_.size());
    rows_.push_back(row);
    by_subject_[row.subject].push_back(idx);
    by_object_[row.object].push_back(idx);
}

std::vector<RelationId> TripleStore::search_relations(const EntityId& entity, Direction direction) const {
    std::shared_lock lock(mutex_);
    std::vector<RelationId> out;
    const auto* id = find_id(entity.value);
    if (!id) return out;
    const auto& index = direction == Direction::outgoing ? by_subject_ : by_object_;
    auto it = index.find(*id);
    if (it == index.end()) return out;
    for (auto row : it->second) out.emplace_back(strings_[rows_[row].relation]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<EntityId> TripleStore::search_entities(const EntityId& entity, const RelationId& relation,
                                                   Direction direction) const {
    std::shared_lock lock(mutex_);
    std::vector<EntityId> out;
    const auto* id = find_id(entity.value);
    const auto* rel = find_id(relation.value);
    if (!id || !rel) return out;
    const auto& index = direction == Direction::outgoing ? by_subject_ : by_object_;
    auto it = index.find(*id);
    if (it == index.end()) return out;
    for (auto idx : it->second) {
        const auto& row = rows_[idx];
        if (row.relation != *rel) continue;
        out.emplace_back(strings_[direction == Direction::outgoing ? row.object : row.subject]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

EntityLabel TripleStore::resolve_label(const EntityId& entity) const {
    std::shared_lock lock(mutex_);
    const auto* id = find_id(entity.value);
    if (id) {
        auto it = by_subject_.find(*id);
        if (it != by_subject_.end()) {
            const std::string* same_as = nullptr;
            // name triples win over sameAs; first loaded wins within each
            for (auto idx : it->second) {
                const auto& row = rows_[idx];
                const auto& rel = strings_[row.relation];
                if (rel == kNameRelation) return {entity, strings_[row.object]};
                if (!same_as && rel == kSameAsRelation) same_as = &strings_[row.object];
            }
            if (same_as) return {entity, *same_as};
        }
    }
    return {entity, entity.value};
}

}  // namespace kgreason::kg
