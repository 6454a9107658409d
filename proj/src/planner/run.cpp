#include "kgreason/planner/run.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "kgreason/llm/parse.hpp"

namespace kgreason::planner {

namespace {

using nlohmann::json;

constexpr std::string_view kUnknownStatus = "unknown";

constexpr std::string_view kForcedSuffix =
    "\nThe exploration budget is exhausted. Give the most likely answer in \"A\" even if the information is "
    "incomplete.";

std::string normalized(std::string_view s) {
    std::string out;
    bool space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

json ids_json(const std::vector<kg::EntityId>& ids) {
    json a = json::array();
    for (const auto& e : ids) a.push_back(e.value);
    return a;
}

// Selection matching: exact id or label first, then a case/space-insensitive label.
std::vector<kg::EntityId> match_entities(const std::string& item, const std::vector<Entity>& pool) {
    std::vector<kg::EntityId> hits;
    for (const auto& c : pool) {
        if (c.id.value == item || c.label == item) hits.push_back(c.id);
    }
    if (hits.empty()) {
        auto want = normalized(item);
        for (const auto& c : pool) {
            if (normalized(c.label) == want) hits.push_back(c.id);
        }
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    return hits;
}

}  // namespace

bool is_schema_relation(std::string_view r) {
    return r.starts_with("type.object.") || r.starts_with("common.") || r.starts_with("freebase.") ||
           r.starts_with("kg.") || r == "type.type.instance" || r.find("owl#sameAs") != std::string_view::npos ||
           r.find("rdf-syntax-ns#type") != std::string_view::npos;
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::answered: return "answered";
        case RunStatus::exhausted: return "exhausted";
        case RunStatus::failed: return "failed";
    }
    return "failed";
}

QuestionRun::QuestionRun(Question question, PlannerConfig config, const Backends& backends)
    : question_(std::move(question)), config_(std::move(config)), backends_(backends) {
    question_.validate();
    config_.validate();
    std::vector<ReasoningPath> roots;
    for (const auto& t : question_.topic_entities) {
        labels_.emplace(t.id, t.label);
        ReasoningPath root{t.id, {}};
        memory_.subgraph.entities.insert(t.id);
        memory_.paths.push_back(root);
        frontier_.candidate_pool.emplace(t.id, root);
        roots.push_back(std::move(root));
    }
    frontier_.set_active(std::move(roots));
}

void QuestionRun::warn(std::string message) { warnings_.push_back(std::move(message)); }

void QuestionRun::notify(std::string_view stage, const ReflectionDecision* decision) {
    if (observer_) observer_(StepView{stage, sub_objectives_, memory_, frontier_, config_, decision});
}

std::string QuestionRun::label(const kg::EntityId& e) {
    if (auto it = labels_.find(e); it != labels_.end()) return it->second;
    auto resolved = backends_.kg.resolve_label(e);
    trace_.add(EventKind::kg_query, frontier_.iteration,
               {{"op", "resolve_label"}, {"entity", e.value}, {"label", resolved.label}});
    labels_.emplace(e, resolved.label);
    return resolved.label;
}

std::vector<kg::RelationId> QuestionRun::kg_relations(const kg::EntityId& e, kg::Direction d) {
    auto rels = backends_.kg.search_relations(e, d);
    json names = json::array();
    for (const auto& r : rels) names.push_back(r.value);
    trace_.add(EventKind::kg_query, frontier_.iteration,
               {{"op", "search_relations"}, {"entity", e.value}, {"direction", kg::to_string(d)}, {"results", names}});
    return rels;
}

std::vector<kg::EntityId> QuestionRun::kg_entities(const kg::EntityId& e, const kg::RelationId& r, kg::Direction d) {
    auto ents = backends_.kg.search_entities(e, r, d);
    trace_.add(EventKind::kg_query, frontier_.iteration,
               {{"op", "search_entities"},
                {"entity", e.value},
                {"relation", r.value},
                {"direction", kg::to_string(d)},
                {"results", ids_json(ents)}});
    return ents;
}

std::string QuestionRun::ask(PromptId id, const std::string& prompt, std::string_view stage) {
    auto c = backends_.llm.complete(prompt, config_.generation);
    trace_.add(EventKind::llm_call, frontier_.iteration,
               {{"template", template_name(id)},
                {"stage", stage},
                {"prompt", prompt},
                {"response", c.text},
                {"latency_ms", static_cast<double>(c.latency.count()) / 1000.0}},
               c.usage);
    return c.text;
}

template <typename Parse>
auto QuestionRun::ask_parsed(PromptId id, const Bindings& bindings, std::string_view stage, std::string_view shape,
                             Parse parse) -> std::optional<decltype(parse(std::string{}))> {
    auto prompt = backends_.prompts.render(id, bindings);
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt == 1) {
            prompt += "\nYour previous output could not be parsed. Output only the ";
            prompt += shape;
            prompt += " with no other text.";
        }
        auto text = ask(id, prompt, stage);
        try {
            return parse(text);
        } catch (const llm::ParseError& e) {
            last_error = std::string(llm::to_string(e.kind())) + ": " + e.what();
        }
    }
    warn(std::string(stage) + ": unparseable model output after re-prompt (" + last_error + ")");
    return std::nullopt;
}

std::string QuestionRun::render_status() const {
    std::string out = "{";
    for (std::size_t i = 0; i < memory_.status.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + std::to_string(i + 1) + "\": " + json(memory_.status[i]).dump(-1, ' ', false, json::error_handler_t::replace);
    }
    return out + "}";
}

std::string QuestionRun::render_step(const PathStep& s) {
    return "(" + label(s.triple.subject) + ", " + s.triple.relation.value + ", " + label(s.triple.object) + ")";
}

std::string QuestionRun::render_paths() {
    std::vector<std::string> lines;
    for (const auto& p : memory_.paths) {
        if (p.steps.empty()) continue;
        std::vector<std::string> parts;
        for (const auto& s : p.steps) parts.push_back(render_step(s));
        auto line = join(parts, ", ");
        if (std::find(lines.begin(), lines.end(), line) == lines.end()) lines.push_back(std::move(line));
    }
    return lines.empty() ? std::string("none") : join(lines, "\n");
}

const std::vector<std::string>& QuestionRun::decompose() {
    json payload = {{"stage", "decompose"}};
    if (config_.ablations.no_guidance) {
        sub_objectives_ = {question_.text};
        payload["ablation"] = "no_guidance";
    } else {
        auto items = ask_parsed(PromptId::decompose, {{"Q", question_.text}}, "decompose", "list",
                                [](const std::string& text) {
                                    auto list = llm::parse_list(text);
                                    std::erase_if(list, [](const std::string& s) { return s.empty(); });
                                    if (list.empty()) {
                                        throw llm::ParseError(llm::ParseErrorKind::no_list_found,
                                                              "decomposition produced an empty list");
                                    }
                                    return list;
                                });
        if (items) {
            sub_objectives_ = std::move(*items);
        } else {
            sub_objectives_ = {question_.text};
            payload["degraded"] = true;
            payload["warning"] = warnings_.back();
        }
    }
    memory_.status.assign(sub_objectives_.size(), std::string(kUnknownStatus));
    payload["sub_objectives"] = sub_objectives_;
    trace_.add(EventKind::selection, 0, std::move(payload));
    notify("decompose");
    return sub_objectives_;
}

void QuestionRun::begin_iteration() {
    ++frontier_.iteration;
    frontier_.tail_relations.clear();
    if (config_.ablations.no_memory) {
        // only the current frontier survives
        memory_.subgraph = {};
        frontier_.candidate_pool.clear();
        for (const auto& p : frontier_.active) {
            memory_.subgraph.entities.insert(p.tail());
            frontier_.candidate_pool.try_emplace(p.tail(), p);
        }
    }
}

void QuestionRun::explore_relations() {
    frontier_.tail_relations.clear();
    const auto breadth = config_.ablations.fixed_breadth;

    for (const auto& tail : frontier_.tail_entities) {
        json payload = {{"stage", "relations"}, {"entity", tail.value}, {"label", label(tail)}};
        // Literal values (dates, numbers) have no outgoing facts worth exploring.
        if (!kg::looks_like_mid(tail.value)) {
            payload["skipped"] = "literal";
            trace_.add(EventKind::selection, frontier_.iteration, std::move(payload));
            continue;
        }

        std::vector<CandidateRelation> candidates;
        for (auto d : {kg::Direction::outgoing, kg::Direction::incoming}) {
            for (auto& r : kg_relations(tail, d)) {
                if (is_schema_relation(r.value)) continue;
                CandidateRelation c{tail, std::move(r), d};
                memory_.subgraph.relations.insert(c);
                if (!frontier_.expanded.contains(c)) candidates.push_back(std::move(c));
            }
        }
        std::vector<std::string> names;
        for (const auto& c : candidates) names.push_back(c.relation.value);
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        payload["candidates"] = names;
        if (names.empty()) {
            payload["selected"] = json::array();
            trace_.add(EventKind::selection, frontier_.iteration, std::move(payload));
            continue;
        }

        std::optional<std::vector<std::string>> picked;
        try {
            picked = ask_parsed(PromptId::relation_select,
                                {{"Q", question_.text},
                                 {"Sub-Objectives", llm::render_list(sub_objectives_)},
                                 {"Topic Entity", label(tail)},
                                 {"Relations", join(names, "; ")}},
                                "explore_relations", "list", [](const std::string& t) { return llm::parse_list(t); });
        } catch (const llm::LlmError& e) {
            warn("explore_relations: model call failed for " + tail.value + ": " + e.what());
        }
        if (!picked) {
            payload["selected"] = json::array();
            payload["warning"] = warnings_.empty() ? "" : warnings_.back();
            trace_.add(EventKind::selection, frontier_.iteration, std::move(payload));
            continue;
        }

        std::vector<std::string> kept, dropped, truncated;
        for (auto& item : *picked) {
            if (std::binary_search(names.begin(), names.end(), item)) {
                if (std::find(kept.begin(), kept.end(), item) == kept.end()) kept.push_back(item);
            } else {
                dropped.push_back(item);
            }
        }
        if (breadth && kept.size() > *breadth) {
            truncated.assign(kept.begin() + static_cast<std::ptrdiff_t>(*breadth), kept.end());
            kept.resize(*breadth);
        }
        if (kept.empty()) warn("explore_relations: no valid relation selected for " + tail.value);

        for (const auto& name : kept) {
            for (const auto& c : candidates) {
                if (c.relation.value != name) continue;
                frontier_.expanded.insert(c);
                for (const auto& path : frontier_.active) {
                    if (path.tail() == tail) frontier_.tail_relations.push_back({path, c.relation, c.direction});
                }
            }
        }
        payload["selected"] = kept;
        payload["dropped"] = dropped;
        if (!truncated.empty()) payload["truncated"] = truncated;
        trace_.add(EventKind::selection, frontier_.iteration, std::move(payload));
    }
    notify("explore_relations");
}

void QuestionRun::explore_entities() {
    const auto& pending = frontier_.tail_relations;
    json payload = {{"stage", "entities"}};

    // Candidates per pending extension, after recall.
    std::vector<std::vector<Entity>> offered(pending.size());
    std::map<std::tuple<kg::EntityId, kg::RelationId, kg::Direction>, std::vector<Entity>> queried;
    json recall_log = json::array();

    for (std::size_t i = 0; i < pending.size(); ++i) {
        const auto& p = pending[i];
        const auto& tail = p.path.tail();
        auto key = std::make_tuple(tail, p.relation, p.direction);
        auto it = queried.find(key);
        if (it == queried.end()) {
            std::vector<Entity> all;
            for (auto& e : kg_entities(tail, p.relation, p.direction)) {
                auto l = label(e);
                all.push_back({std::move(e), std::move(l)});
            }
            if (all.size() > config_.recall.threshold) {
                std::vector<std::pair<kg::EntityId, std::string>> pairs;
                for (const auto& c : all) pairs.emplace_back(c.id, c.label);
                auto top = recall::top_k(backends_.scorer, question_.text, pairs, config_.recall.k);
                std::vector<Entity> kept;
                for (auto& s : top) kept.push_back({std::move(s.entity), std::move(s.label)});
                recall_log.push_back({{"entity", tail.value},
                                      {"relation", p.relation.value},
                                      {"retrieved", all.size()},
                                      {"offered", kept.size()}});
                // every retrieved entity still joins the subgraph and pool
                for (const auto& c : all) {
                    memory_.subgraph.entities.insert(c.id);
                    auto step = p.direction == kg::Direction::outgoing
                                    ? PathStep{{tail, p.relation, c.id}, p.direction}
                                    : PathStep{{c.id, p.relation, tail}, p.direction};
                    memory_.subgraph.triplets.insert(step.triple);
                }
                it = queried.emplace(key, std::move(kept)).first;
                // pool entries are added below from the full list
                for (const auto& c : all) {
                    auto step = p.direction == kg::Direction::outgoing
                                    ? PathStep{{tail, p.relation, c.id}, p.direction}
                                    : PathStep{{c.id, p.relation, tail}, p.direction};
                    if (!p.path.contains(c.id)) frontier_.candidate_pool.try_emplace(c.id, p.path.extended(step));
                }
            } else {
                it = queried.emplace(key, std::move(all)).first;
            }
        }
        offered[i] = it->second;
        for (const auto& c : offered[i]) {
            auto step = p.direction == kg::Direction::outgoing ? PathStep{{tail, p.relation, c.id}, p.direction}
                                                               : PathStep{{c.id, p.relation, tail}, p.direction};
            memory_.subgraph.entities.insert(c.id);
            memory_.subgraph.triplets.insert(step.triple);
            if (!p.path.contains(c.id)) frontier_.candidate_pool.try_emplace(c.id, p.path.extended(step));
        }
    }
    if (!recall_log.empty()) payload["recall"] = recall_log;

    std::vector<std::string> lines;
    std::vector<Entity> offered_all;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        if (offered[i].empty()) continue;
        std::vector<std::string> labels;
        for (const auto& c : offered[i]) {
            labels.push_back(c.label);
            offered_all.push_back(c);
        }
        const auto& p = pending[i];
        auto bracket = "[" + join(labels, ", ") + "]";
        auto tail_label = label(p.path.tail());
        auto line = p.direction == kg::Direction::outgoing
                        ? "(" + tail_label + ", " + p.relation.value + ", " + bracket + ")"
                        : "(" + bracket + ", " + p.relation.value + ", " + tail_label + ")";
        if (std::find(lines.begin(), lines.end(), line) == lines.end()) lines.push_back(std::move(line));
    }

    std::vector<ReasoningPath> extended;
    std::vector<ReasoningPath> extended_sources;
    if (!lines.empty()) {
        std::optional<std::vector<std::string>> picked;
        try {
            picked = ask_parsed(PromptId::entity_select, {{"Q", question_.text}, {"Triplets", join(lines, "\n")}},
                                "explore_entities", "list", [](const std::string& t) { return llm::parse_list(t); });
        } catch (const llm::LlmError& e) {
            warn(std::string("explore_entities: model call failed: ") + e.what());
        }

        std::vector<kg::EntityId> selected;
        std::vector<std::string> dropped;
        std::vector<kg::EntityId> truncated;
        if (picked) {
            for (const auto& item : *picked) {
                auto hits = match_entities(item, offered_all);
                if (hits.empty()) dropped.push_back(item);
                for (auto& h : hits) {
                    if (std::find(selected.begin(), selected.end(), h) == selected.end()) selected.push_back(h);
                }
            }
        } else {
            payload["warning"] = warnings_.empty() ? "" : warnings_.back();
        }
        const auto breadth = config_.ablations.fixed_breadth;
        if (breadth && selected.size() > *breadth) {
            truncated.assign(selected.begin() + static_cast<std::ptrdiff_t>(*breadth), selected.end());
            selected.resize(*breadth);
        }

        json cycles = json::array();
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const auto& p = pending[i];
            for (const auto& c : offered[i]) {
                if (std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
                if (p.path.contains(c.id)) {
                    cycles.push_back({{"entity", c.id.value}, {"relation", p.relation.value}});
                    continue;
                }
                const auto& tail = p.path.tail();
                auto step = p.direction == kg::Direction::outgoing ? PathStep{{tail, p.relation, c.id}, p.direction}
                                                                   : PathStep{{c.id, p.relation, tail}, p.direction};
                auto np = p.path.extended(std::move(step));
                if (std::find(extended.begin(), extended.end(), np) == extended.end()) extended.push_back(std::move(np));
                if (std::find(extended_sources.begin(), extended_sources.end(), p.path) == extended_sources.end()) {
                    extended_sources.push_back(p.path);
                }
            }
        }
        payload["triplets"] = lines;
        payload["selected"] = ids_json(selected);
        payload["dropped"] = dropped;
        if (!truncated.empty()) payload["truncated"] = ids_json(truncated);
        if (!cycles.empty()) payload["cycles"] = cycles;
    } else {
        payload["triplets"] = json::array();
        payload["selected"] = json::array();
    }

    // Paths that were not extended stay in memory as suspended context.
    next_paths_.clear();
    if (!config_.ablations.no_memory) {
        for (const auto& p : memory_.paths) {
            if (std::find(extended_sources.begin(), extended_sources.end(), p) == extended_sources.end()) {
                next_paths_.push_back(p);
            }
        }
    }
    for (const auto& p : extended) {
        if (std::find(next_paths_.begin(), next_paths_.end(), p) == next_paths_.end()) next_paths_.push_back(p);
    }

    frontier_.set_active(extended);
    frontier_.tail_relations.clear();
    json tails = json::array();
    for (const auto& t : frontier_.tail_entities) tails.push_back(label(t));
    payload["frontier"] = tails;
    trace_.add(EventKind::selection, frontier_.iteration, std::move(payload));
    notify("explore_entities");
}

void QuestionRun::update_memory() {
    memory_.paths = next_paths_;
    json payload = json::object();

    if (config_.ablations.no_memory) {
        memory_.status.assign(sub_objectives_.size(), std::string(kUnknownStatus));
        payload["ablation"] = "no_memory";
    } else {
        auto parsed = ask_parsed(PromptId::memory_update,
                                 {{"Q", question_.text},
                                  {"Sub-Objectives", llm::render_list(sub_objectives_)},
                                  {"Memory", render_status()},
                                  {"Knowledge Triplets", render_paths()}},
                                 "update_memory", "JSON object",
                                 [](const std::string& t) { return llm::extract_json_object(t); });
        if (parsed) {
            for (const auto& [key, value] : parsed->items()) {
                std::string digits;
                for (char c : key) {
                    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
                }
                if (digits.empty() || digits.size() > 6) continue;
                auto idx = std::stoul(digits);
                if (idx < 1 || idx > memory_.status.size()) continue;
                auto text = llm::as_text(value);
                if (!text.empty()) memory_.status[idx - 1] = std::move(text);
            }
        } else {
            payload["warning"] = warnings_.back();
        }
    }

    json tails = json::array();
    for (const auto& t : frontier_.tail_entities) tails.push_back(label(t));
    payload["status"] = memory_.status;
    payload["frontier"] = tails;
    payload["paths"] = memory_.paths.size();
    payload["candidate_pool"] = frontier_.candidate_pool.size();
    payload["subgraph_triplets"] = memory_.subgraph.triplets.size();
    trace_.add(EventKind::memory_update, frontier_.iteration, std::move(payload));
    notify("update_memory");
}

Verdict QuestionRun::evaluate(bool forced) {
    auto bindings = Bindings{{"Q", question_.text}, {"Memory", render_status()}, {"Knowledge Triplets", render_paths()}};
    auto parse = [](const std::string& t) { return llm::parse_json_object(t, {"A", "R"}); };

    std::optional<json> parsed;
    if (forced) {
        // Same contract as a normal evaluation, with one appended instruction.
        auto base = backends_.prompts.render(PromptId::answer, bindings);
        auto prompt = base + std::string(kForcedSuffix);
        for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
            if (attempt == 1) prompt += "\nYour previous output could not be parsed. Output only the JSON object.";
            auto text = ask(PromptId::answer, prompt, "forced_answer");
            try {
                parsed = parse(text);
            } catch (const llm::ParseError&) {
            }
        }
        if (!parsed) warn("forced_answer: unparseable model output after re-prompt");
    } else {
        parsed = ask_parsed(PromptId::answer, bindings, "evaluate", "JSON object", parse);
    }

    Verdict v;
    json payload = {{"forced", forced}};
    if (parsed) {
        const auto& a = (*parsed)["A"];
        std::string answer = a.is_array() ? (a.empty() ? std::string() : llm::as_text(a.front())) : llm::as_text(a);
        auto first = answer.find_first_not_of(" \t\r\n");
        answer = first == std::string::npos ? std::string() : answer.substr(first, answer.find_last_not_of(" \t\r\n") - first + 1);
        v.reason = llm::as_text((*parsed)["R"]);
        v.sufficient = !is_insufficient_answer(answer);
        if (v.sufficient) v.answer = answer;
        last_answer_text_ = answer;
        payload["A"] = a;
    } else {
        v.reason = "unparseable evaluation output";
        last_answer_text_.clear();
        payload["warning"] = warnings_.back();
    }
    payload["sufficient"] = v.sufficient;
    payload["answer"] = v.answer ? json(*v.answer) : json(nullptr);
    payload["reason"] = v.reason;
    trace_.add(EventKind::verdict, frontier_.iteration, std::move(payload));
    notify("evaluate");
    return v;
}

ReflectionDecision QuestionRun::reflect() {
    ReflectionDecision d;
    json payload = json::object();
    auto finish = [&]() {
        payload["add"] = d.add;
        payload["reason"] = d.reason;
        json back = json::array();
        for (const auto& e : d.backtrack_entities) back.push_back({{"entity", e.value}, {"label", label(e)}});
        payload["backtrack"] = back;
        json tails = json::array();
        for (const auto& t : frontier_.tail_entities) tails.push_back(label(t));
        payload["frontier"] = tails;
        trace_.add(EventKind::reflection, frontier_.iteration, std::move(payload));
        notify("reflect", &d);
        return d;
    };

    if (config_.ablations.no_reflection) {
        payload["ablation"] = "no_reflection";
        return finish();
    }

    std::vector<std::string> tail_labels;
    for (const auto& t : frontier_.tail_entities) tail_labels.push_back(label(t));
    auto stage1 = ask_parsed(PromptId::reflect,
                             {{"Q", question_.text},
                              {"Entities", llm::render_list(tail_labels)},
                              {"Memory", render_status()},
                              {"Knowledge Triplets", render_paths()}},
                             "reflect", "JSON object", [](const std::string& t) {
                                 auto obj = llm::parse_json_object(t, {"Add", "Reason"});
                                 auto add = llm::as_boolish(obj["Add"]);
                                 if (!add) {
                                     throw llm::ParseError(llm::ParseErrorKind::malformed_json,
                                                           "\"Add\" is not a yes/no value");
                                 }
                                 return std::make_pair(*add, llm::as_text(obj["Reason"]));
                             });
    if (!stage1) {
        payload["warning"] = warnings_.back();
        return finish();
    }
    d.reason = stage1->second;
    if (!stage1->first) return finish();

    std::vector<Entity> pool;
    std::vector<std::string> pool_labels;
    for (const auto& [id, path] : frontier_.candidate_pool) {
        auto l = label(id);
        pool.push_back({id, l});
        pool_labels.push_back(l);
    }
    std::sort(pool_labels.begin(), pool_labels.end());
    pool_labels.erase(std::unique(pool_labels.begin(), pool_labels.end()), pool_labels.end());

    auto stage2 = ask_parsed(PromptId::backtrack_select,
                             {{"Q", question_.text},
                              {"Reason", d.reason},
                              {"Candidate Entities", llm::render_list(pool_labels)},
                              {"Memory", render_status()}},
                             "reflect_select", "list", [](const std::string& t) { return llm::parse_list(t); });
    std::vector<kg::EntityId> chosen;
    json dropped = json::array();
    if (stage2) {
        for (const auto& item : *stage2) {
            auto hits = match_entities(item, pool);
            bool any = false;
            for (auto& h : hits) {
                if (std::find(frontier_.tail_entities.begin(), frontier_.tail_entities.end(), h) !=
                    frontier_.tail_entities.end()) {
                    continue;
                }
                any = true;
                if (std::find(chosen.begin(), chosen.end(), h) == chosen.end()) chosen.push_back(h);
            }
            if (!any) dropped.push_back(item);
        }
    }
    payload["dropped"] = dropped;
    if (chosen.empty()) {
        warn("reflect: no valid backtrack entity selected");
        payload["warning"] = warnings_.back();
        return finish();
    }

    d.add = true;
    d.backtrack_entities = chosen;
    for (const auto& e : chosen) frontier_.add_active(frontier_.candidate_pool.at(e));
    return finish();
}

RunOutcome run_question(const Question& question, const PlannerConfig& config, const Backends& backends,
                        StepObserver observer) {
    RunOutcome out;
    auto start = std::chrono::steady_clock::now();
    std::optional<QuestionRun> run;
    try {
        run.emplace(question, config, backends);
        run->set_observer(std::move(observer));
        out.sub_objectives = run->decompose();

        for (std::size_t depth = 1; depth <= config.max_depth; ++depth) {
            run->begin_iteration();
            out.iterations = depth;
            run->explore_relations();
            run->explore_entities();
            run->update_memory();
            out.verdict = run->evaluate();
            if (out.verdict.sufficient) {
                out.status = RunStatus::answered;
                out.answer = *out.verdict.answer;
                break;
            }
            if (depth < config.max_depth) run->reflect();
        }
        if (out.status != RunStatus::answered) {
            out.verdict = run->evaluate(true);
            out.status = RunStatus::exhausted;
            out.answer = run->last_answer_text();
        }
    } catch (const std::exception& e) {
        out.status = RunStatus::failed;
        out.error = e.what();
    }

    auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (run) out.trace = std::move(run->trace());
    auto totals = usage_total(out.trace);
    json payload = {{"status", to_string(out.status)},
                    {"answer", out.answer},
                    {"reason", out.verdict.reason},
                    {"iterations", out.iterations},
                    {"sub_objectives", out.sub_objectives},
                    {"calls", totals.calls},
                    {"input_tokens", totals.usage.input_tokens},
                    {"output_tokens", totals.usage.output_tokens},
                    {"seconds", seconds}};
    if (run) payload["warnings"] = run->warnings();
    if (!out.error.empty()) payload["error"] = out.error;
    out.trace.add(EventKind::final, out.iterations, std::move(payload));
    return out;
}

}  // namespace kgreason::planner
