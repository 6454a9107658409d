#include "kgreason/harness/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace kgreason::harness {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<DatasetFlavor, std::string_view>, 4> kFlavors = {{
    {DatasetFlavor::normalized, "normalized"},
    {DatasetFlavor::cwq, "cwq"},
    {DatasetFlavor::webqsp, "webqsp"},
    {DatasetFlavor::grailqa, "grailqa"},
}};

std::string text_field(const json& j, std::size_t index, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        auto it = j.find(k);
        if (it == j.end() || it->is_null()) continue;
        if (it->is_string()) return it->get<std::string>();
        if (it->is_number()) return it->dump();
        throw DatasetError(index, std::string("field '") + k + "' is not a string");
    }
    throw DatasetError(index, std::string("missing field '") + *keys.begin() + "'");
}

// {"m.x": "Label", ...}
std::vector<planner::Entity> topic_map(const json& j, std::size_t index) {
    std::vector<planner::Entity> out;
    auto it = j.find("topic_entity");
    if (it == j.end() || it->is_null()) return out;
    if (!it->is_object()) throw DatasetError(index, "field 'topic_entity' is not an object");
    for (const auto& [mid, label] : it->items()) {
        if (!label.is_string()) throw DatasetError(index, "topic entity " + mid + " has a non-string label");
        out.push_back({kg::EntityId(mid), label.get<std::string>()});
    }
    return out;
}

void add_answer(std::vector<std::string>& out, std::string a) {
    if (a.empty() || std::find(out.begin(), out.end(), a) != out.end()) return;
    out.push_back(std::move(a));
}

// Answer objects carry a readable name when one exists, else the raw argument.
void add_answer_object(std::vector<std::string>& out, const json& a, const char* name_key, const char* arg_key,
                       std::size_t index) {
    if (a.is_string()) return add_answer(out, a.get<std::string>());
    if (!a.is_object()) throw DatasetError(index, "answer entry is not an object");
    auto name = a.find(name_key);
    if (name != a.end() && name->is_string() && !name->get<std::string>().empty()) {
        return add_answer(out, name->get<std::string>());
    }
    auto arg = a.find(arg_key);
    if (arg != a.end() && arg->is_string()) add_answer(out, arg->get<std::string>());
}

DatasetRecord from_normalized(const json& j, std::size_t index) {
    DatasetRecord r;
    r.id = text_field(j, index, {"id"});
    r.question.text = text_field(j, index, {"question"});
    auto topics = j.find("topic_entities");
    if (topics == j.end() || !topics->is_array()) throw DatasetError(index, "missing array 'topic_entities'");
    for (const auto& t : *topics) {
        if (!t.is_object()) throw DatasetError(index, "topic entity is not an object");
        r.question.topic_entities.push_back({kg::EntityId(text_field(t, index, {"mid"})), text_field(t, index, {"label"})});
    }
    auto answers = j.find("answers");
    if (answers == j.end() || !answers->is_array()) throw DatasetError(index, "missing array 'answers'");
    for (const auto& a : *answers) {
        if (!a.is_string()) throw DatasetError(index, "answer is not a string");
        add_answer(r.answers, a.get<std::string>());
    }
    if (auto tag = j.find("tag"); tag != j.end() && tag->is_string()) r.tag = tag->get<std::string>();
    return r;
}

DatasetRecord from_cwq(const json& j, std::size_t index) {
    DatasetRecord r;
    r.id = text_field(j, index, {"ID", "id"});
    r.question.text = text_field(j, index, {"question"});
    r.question.topic_entities = topic_map(j, index);
    auto a = j.find("answer");
    if (a == j.end()) a = j.find("answers");
    if (a != j.end()) {
        if (a->is_string()) {
            add_answer(r.answers, a->get<std::string>());
        } else if (a->is_array()) {
            for (const auto& x : *a) add_answer_object(r.answers, x, "answer", "answer_id", index);
        } else if (!a->is_null()) {
            throw DatasetError(index, "field 'answer' has an unsupported type");
        }
    }
    return r;
}

DatasetRecord from_webqsp(const json& j, std::size_t index) {
    DatasetRecord r;
    r.id = text_field(j, index, {"QuestionId", "id"});
    r.question.text = text_field(j, index, {"RawQuestion", "ProcessedQuestion", "question"});
    r.question.topic_entities = topic_map(j, index);
    if (auto parses = j.find("Parses"); parses != j.end() && parses->is_array()) {
        for (const auto& p : *parses) {
            auto answers = p.find("Answers");
            if (answers == p.end() || !answers->is_array()) continue;
            for (const auto& a : *answers) add_answer_object(r.answers, a, "EntityName", "AnswerArgument", index);
        }
    }
    return r;
}

DatasetRecord from_grailqa(const json& j, std::size_t index) {
    DatasetRecord r;
    r.id = text_field(j, index, {"qid", "id"});
    r.question.text = text_field(j, index, {"question"});
    r.question.topic_entities = topic_map(j, index);
    if (auto answers = j.find("answer"); answers != j.end() && answers->is_array()) {
        for (const auto& a : *answers) add_answer_object(r.answers, a, "entity_name", "answer_argument", index);
    }
    if (auto level = j.find("level"); level != j.end() && level->is_string()) r.tag = level->get<std::string>();
    return r;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view to_string(DatasetFlavor f) {
    for (const auto& [k, name] : kFlavors) {
        if (k == f) return name;
    }
    return "normalized";
}

std::string valid_flavor_names() {
    std::string out;
    for (const auto& [k, name] : kFlavors) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

DatasetFlavor dataset_flavor_from_string(std::string_view s) {
    for (const auto& [k, name] : kFlavors) {
        if (name == s) return k;
    }
    throw std::invalid_argument("unknown dataset flavor '" + std::string(s) + "' (valid: " + valid_flavor_names() + ")");
}

bool DatasetRecord::operator==(const DatasetRecord& o) const {
    if (id != o.id || question.text != o.question.text || answers != o.answers || tag != o.tag) return false;
    if (question.topic_entities.size() != o.question.topic_entities.size()) return false;
    for (std::size_t i = 0; i < question.topic_entities.size(); ++i) {
        const auto& a = question.topic_entities[i];
        const auto& b = o.question.topic_entities[i];
        if (a.id != b.id || a.label != b.label) return false;
    }
    return true;
}

Dataset parse_dataset(std::string_view text, DatasetFlavor flavor) {
    Dataset out;
    if (blank(text)) return out;
    auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw std::invalid_argument("dataset is not valid JSON");
    if (doc.is_object()) {
        auto q = doc.find("Questions");
        if (q == doc.end()) q = doc.find("questions");
        if (q == doc.end() || !q->is_array()) throw std::invalid_argument("dataset must be a JSON array of records");
        doc = *q;
    }
    if (!doc.is_array()) throw std::invalid_argument("dataset must be a JSON array of records");

    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& j = doc[i];
        if (!j.is_object()) throw DatasetError(i, "not a JSON object");
        DatasetRecord r;
        switch (flavor) {
            case DatasetFlavor::normalized: r = from_normalized(j, i); break;
            case DatasetFlavor::cwq: r = from_cwq(j, i); break;
            case DatasetFlavor::webqsp: r = from_webqsp(j, i); break;
            case DatasetFlavor::grailqa: r = from_grailqa(j, i); break;
        }
        if (blank(r.question.text)) throw DatasetError(i, "question text is blank");
        if (r.question.topic_entities.empty()) {
            out.skipped.push_back({i, r.id, "no topic entities"});
            continue;
        }
        if (r.answers.empty()) {
            out.skipped.push_back({i, r.id, "no gold answers"});
            continue;
        }
        try {
            r.question.validate();
        } catch (const std::invalid_argument& e) {
            throw DatasetError(i, e.what());
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFlavor flavor) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), flavor);
}

void save_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
    json doc = json::array();
    for (const auto& r : records) {
        json topics = json::array();
        for (const auto& t : r.question.topic_entities) topics.push_back({{"mid", t.id.value}, {"label", t.label}});
        json j = {{"id", r.id}, {"question", r.question.text}, {"topic_entities", topics}, {"answers", r.answers}};
        if (!r.tag.empty()) j["tag"] = r.tag;
        doc.push_back(std::move(j));
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write dataset: " + path.string());
    out << doc.dump(2) << '\n';
}

std::string normalize_answer(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

bool hits_at_1(std::string_view predicted, const std::vector<std::string>& gold) {
    auto p = normalize_answer(predicted);
    return std::any_of(gold.begin(), gold.end(), [&](const std::string& g) { return normalize_answer(g) == p; });
}

}  // namespace kgreason::harness
