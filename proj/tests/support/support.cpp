#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "httplib.h"
#include "kgreason/llm/parse.hpp"

namespace kgreason::testing {

using nlohmann::json;

std::filesystem::path data_dir() { return KGREASON_TEST_DATA; }

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::path(KGREASON_TEST_SCRATCH) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

planner::Question control_question() {
    return {kControlQuestion,
            {{kg::EntityId("m.naked_dead"), "The Naked and the Dead"},
             {kg::EntityId("m.pres_panama"), "President of Panama"}}};
}

std::unique_ptr<kg::TripleStore> panama_store() {
    auto s = std::make_unique<kg::TripleStore>();
    s->load(data_dir() / "panama.tsv", kg::TripleFormat::tsv);
    return s;
}

llm::ScriptedResponder panama_script() { return llm::ScriptedResponder::from_file(data_dir() / "panama_script.json"); }

Rig panama_rig() {
    Rig r;
    r.kg = panama_store();
    r.llm = std::make_unique<llm::ScriptedResponder>(panama_script());
    return r;
}

uint64_t fnv1a(std::string_view s, uint64_t seed) {
    uint64_t h = 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

class Dice {
public:
    explicit Dice(uint64_t seed) : state_(seed) {}
    uint64_t next(uint64_t n) {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return n == 0 ? 0 : (state_ >> 33) % n;
    }
    bool chance(uint64_t one_in) { return next(one_in) == 0; }

private:
    uint64_t state_;
};

std::string line_after(const std::string& prompt, std::string_view marker) {
    auto at = prompt.rfind(marker);
    if (at == std::string::npos) return {};
    at += marker.size();
    auto end = prompt.find('\n', at);
    return prompt.substr(at, end == std::string::npos ? std::string::npos : end - at);
}

std::vector<std::string> split(const std::string& s, std::string_view sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(sep, start);
        if (end == std::string::npos) end = s.size();
        if (end > start) out.push_back(s.substr(start, end - start));
        start = end + sep.size();
    }
    return out;
}

// Labels inside the [...] groups of the entity-selection triplet lines.
std::vector<std::string> bracket_labels(const std::string& prompt) {
    std::vector<std::string> out;
    auto at = prompt.rfind("Triplets: ");
    if (at == std::string::npos) return out;
    while ((at = prompt.find('[', at)) != std::string::npos) {
        auto end = prompt.find(']', at);
        if (end == std::string::npos) break;
        for (auto& l : split(prompt.substr(at + 1, end - at - 1), ", ")) out.push_back(l);
        at = end;
    }
    return out;
}

std::vector<std::string> json_list_after(const std::string& prompt, std::string_view marker) {
    auto j = json::parse(line_after(prompt, marker), nullptr, false);
    std::vector<std::string> out;
    if (j.is_array()) {
        for (const auto& x : j) {
            if (x.is_string()) out.push_back(x.get<std::string>());
        }
    }
    return out;
}

std::string pick_list(Dice& d, const std::vector<std::string>& options, const char* ghost) {
    json out = json::array();
    for (const auto& o : options) {
        if (d.chance(2)) out.push_back(o);
    }
    if (!options.empty() && d.chance(3)) out.push_back(options[d.next(options.size())]);
    if (d.chance(4)) out.push_back(ghost);
    return out.dump();
}

std::string wrap(Dice& d, const std::string& payload) {
    switch (d.next(8)) {
        case 0: return "```json\n" + payload + "\n```";
        case 1: return "Sure, here is the output:\n" + payload;
        case 2: return payload + "\nLet me know if you need more.";
        case 3: return payload.substr(0, payload.size() / 2);
        case 4: return d.chance(2) ? "I cannot determine that." : "";
        default: return payload;
    }
}

}  // namespace

std::string ChaosResponder::respond(const std::string& prompt) const {
    Dice d(fnv1a(prompt, seed_));
    std::string payload;
    if (prompt.starts_with("Please break down")) {
        json items = json::array();
        auto n = 1 + d.next(3);
        for (uint64_t i = 1; i <= n; ++i) items.push_back("#" + std::to_string(i) + " step " + std::to_string(i));
        payload = items.dump();
    } else if (prompt.starts_with("Please provide as few")) {
        payload = pick_list(d, split(line_after(prompt, "Relations: "), "; "), "foo.bar");
    } else if (prompt.starts_with("Which entities")) {
        payload = pick_list(d, bracket_labels(prompt), "Ghost Entity");
    } else if (prompt.starts_with("Based on the provided information")) {
        auto n = json_list_after(prompt, "Sub-Objectives: ").size();
        json obj = json::object();
        for (std::size_t i = 1; i <= n + 1; ++i) {
            if (d.chance(3)) continue;
            auto key = d.chance(5) ? "#" + std::to_string(i) : std::to_string(i);
            if (d.chance(6)) obj[key] = static_cast<int>(i);
            else obj[key] = "known fact " + std::to_string(d.next(100));
        }
        payload = obj.dump();
    } else if (prompt.starts_with("Please answer the question")) {
        static const char* kNo[] = {"insufficient", "unknown", "", "No", " Insufficient "};
        json obj = {{"R", "reasoning"}};
        if (!adversarial_ && d.chance(5)) obj["A"] = d.chance(3) ? json::array({"answer " + std::to_string(d.next(9))})
                                                                   : json("answer " + std::to_string(d.next(9)));
        else obj["A"] = kNo[d.next(5)];
        payload = obj.dump();
    } else if (prompt.starts_with("Based on the current set of entities")) {
        static const char* kAdd[] = {"Yes", "No", "yes", "maybe", "True"};
        json obj = {{"Add", adversarial_ ? "No" : kAdd[d.next(5)]}, {"Reason", "because"}};
        payload = obj.dump();
    } else if (prompt.starts_with("Please select the fewest")) {
        payload = pick_list(d, json_list_after(prompt, "Candidate Entities: "), "Ghost Entity");
    } else {
        payload = "unrecognised prompt";
    }
    return wrap(d, payload);
}

llm::Completion ChaosResponder::complete(const std::string& prompt, const llm::GenerationConfig&) const {
    llm::Completion c;
    c.text = respond(prompt);
    c.usage = {llm::approx_tokens(prompt), llm::approx_tokens(c.text)};
    return c;
}

RandomGraph random_graph(std::mt19937_64& rng, std::size_t max_triples) {
    RandomGraph g;
    auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto n_entities = 4 + below(40);
    auto n_relations = 2 + below(12);
    for (std::size_t i = 0; i < n_entities; ++i) g.entities.emplace_back("m.e" + std::to_string(i));
    for (std::size_t i = 0; i < n_relations; ++i) {
        g.relations.emplace_back("d" + std::to_string(i % 3) + ".t.r" + std::to_string(i));
    }
    if (below(3) == 0) g.relations.emplace_back("common.topic.alias");

    for (std::size_t i = 0; i < n_entities; ++i) {
        if (below(5) == 0) continue;
        // a few labels collide on purpose
        auto label = below(10) == 0 ? std::string("Shared Name") : "Entity " + std::to_string(i);
        g.triples.push_back({g.entities[i], kg::RelationId("type.object.name"), kg::EntityId(label)});
    }
    auto target = 1 + below(std::max<std::size_t>(max_triples - std::min(max_triples - 1, g.triples.size()), 1));
    while (g.triples.size() < max_triples && target-- > 0) {
        const auto& s = g.entities[below(n_entities)];
        const auto& r = g.relations[below(g.relations.size())];
        kg::EntityId o = below(20) == 0 ? kg::EntityId("lit-" + std::to_string(below(5))) : g.entities[below(n_entities)];
        g.triples.push_back({s, r, o});
        if (below(25) == 0 && g.triples.size() < max_triples) g.triples.push_back(g.triples.back());
    }
    std::shuffle(g.triples.begin(), g.triples.end(), rng);
    return g;
}

planner::Question random_question(std::mt19937_64& rng, const RandomGraph& g, const kg::KnowledgeGraph& kg) {
    std::vector<kg::EntityId> linked;
    for (const auto& t : g.triples) {
        if (t.relation.value != "type.object.name") linked.push_back(t.subject);
    }
    if (linked.empty()) linked.push_back(g.entities.front());
    std::sort(linked.begin(), linked.end());
    linked.erase(std::unique(linked.begin(), linked.end()), linked.end());
    std::shuffle(linked.begin(), linked.end(), rng);

    planner::Question q;
    auto n = std::min<std::size_t>(linked.size(), 1 + rng() % 2);
    for (std::size_t i = 0; i < n; ++i) q.topic_entities.push_back({linked[i], kg.resolve_label(linked[i]).label});
    q.text = "What is connected to " + q.topic_entities.front().label + "?";
    return q;
}

std::vector<FuzzCase> fuzz_corpus(uint64_t seed, std::size_t n) {
    static const std::vector<std::string> kWords = {
        "Panama", "Juan Carlos Varela", "film.film.story_by", "#1 Find the place", "Zo\xC3\xAB Kravitz",
        "O'Brien", "a, b and c", "\xE6\x9D\xB1\xE4\xBA\xAC", "quote \"inside\"", "tab\there", "x", "1958-08-06"};
    std::mt19937_64 rng(seed);
    auto below = [&](std::size_t k) { return std::uniform_int_distribution<std::size_t>(0, k - 1)(rng); };
    std::vector<FuzzCase> out;
    out.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        FuzzCase c;
        c.shape = below(2) == 0 ? FuzzCase::Shape::list : FuzzCase::Shape::object;
        std::string payload;
        if (c.shape == FuzzCase::Shape::list) {
            auto k = 1 + below(4);
            bool single = below(4) == 0;
            for (std::size_t j = 0; j < k; ++j) {
                auto w = kWords[below(kWords.size())];
                if (single && (w.find('\'') != std::string::npos || w.find('"') != std::string::npos ||
                               w.find('\\') != std::string::npos)) {
                    w = "plain";
                }
                c.list.push_back(w);
            }
            if (single) {
                payload = "[";
                for (std::size_t j = 0; j < c.list.size(); ++j) {
                    if (j) payload += ", ";
                    auto esc = json(c.list[j]).dump();
                    payload += "'" + esc.substr(1, esc.size() - 2) + "'";
                }
                payload += "]";
            } else {
                payload = json(c.list).dump(below(2) == 0 ? -1 : 2);
            }
        } else {
            c.object = {{"A", kWords[below(kWords.size())]}, {"R", kWords[below(kWords.size())]}};
            if (below(3) == 0) c.object["2"] = "unknown";
            payload = c.object.dump(below(2) == 0 ? -1 : 2);
            if (below(4) == 0) payload.insert(payload.size() - 1, ",");  // trailing comma
        }

        switch (below(5)) {
            case 0: c.text = payload; break;
            case 1: c.text = "```json\n" + payload + "\n```"; break;
            case 2: c.text = "Here is the answer:\n" + payload; break;
            case 3: c.text = payload + "\n\nThese were selected because they match the question."; break;
            default: c.text = "Output: " + payload + "\n"; break;
        }
        c.valid = true;

        // mutated copies make up roughly a third of the corpus
        if (below(3) == 0) {
            c.valid = false;
            switch (below(5)) {
                case 0: c.text = c.text.substr(0, below(c.text.size() + 1)); break;
                case 1:
                    std::erase_if(c.text, [](char ch) { return ch == '[' || ch == ']' || ch == '{' || ch == '}'; });
                    break;
                case 2:
                    for (int f = 0; f < 4 && !c.text.empty(); ++f) c.text[below(c.text.size())] = static_cast<char>(rng());
                    break;
                case 3: c.text.clear(); break;
                default: {
                    std::string noise(below(64), '\0');
                    for (auto& ch : noise) ch = static_cast<char>(rng());
                    c.text = noise;
                }
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

uint64_t code_points(const std::string& s) {
    uint64_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

}  // namespace

Resummed resum_trace_file(const std::filesystem::path& path) {
    Resummed r;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = json::parse(line);
        if (j.at("kind") != "llm_call") continue;
        ++r.calls;
        const auto& p = j.at("payload");
        r.input_tokens += (code_points(p.at("prompt").get<std::string>()) + 3) / 4;
        r.output_tokens += (code_points(p.at("response").get<std::string>()) + 3) / 4;
        if (j.contains("usage")) {
            r.recorded_input += j["usage"].at("input_tokens").get<uint64_t>();
            r.recorded_output += j["usage"].at("output_tokens").get<uint64_t>();
        }
    }
    return r;
}

struct LocalServer::Impl {
    httplib::Server server;
};

LocalServer::LocalServer(Handler handler) : impl_(std::make_unique<Impl>()) {
    auto route = [handler](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> headers;
        for (const auto& [k, v] : req.headers) headers[k] = v;
        int status = 200;
        std::string body, type = "application/json";
        handler(req.path, headers, req.body, status, body, type);
        res.status = status;
        res.set_content(body, type);
    };
    impl_->server.Post(".*", route);
    impl_->server.Get(".*", route);
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

LocalServer::~LocalServer() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

std::string LocalServer::url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
}

namespace {

struct Snapshot {
    std::size_t entities = 0, relations = 0, triplets = 0, pool = 0;
    std::vector<kg::EntityId> tails;
};

}  // namespace

std::vector<std::string> run_with_invariants(const planner::Question& question, const planner::PlannerConfig& config,
                                             const planner::Backends& backends, planner::RunOutcome* outcome) {
    std::vector<std::string> bad;
    Snapshot prev;
    std::set<kg::EntityId> topics;
    for (const auto& t : question.topic_entities) topics.insert(t.id);
    const bool no_memory = config.ablations.no_memory;

    auto check_path = [&](const planner::ReasoningPath& p, const planner::StepView& v, const char* where) {
        if (auto why = planner::path_violation(p, config.max_depth); !why.empty()) {
            bad.push_back(std::string(v.stage) + " " + where + ": " + why);
        }
        if (!topics.contains(p.origin)) bad.push_back(std::string(v.stage) + " " + where + ": origin is not a topic entity");
        for (const auto& s : p.steps) {
            auto found = backends.kg.search_entities(s.from(), s.triple.relation, s.direction);
            if (std::find(found.begin(), found.end(), s.to()) == found.end()) {
                bad.push_back(std::string(v.stage) + " " + where + ": step not in the graph: " + s.triple.subject.value +
                              " " + s.triple.relation.value + " " + s.triple.object.value);
            }
            if (!no_memory && !v.memory.subgraph.triplets.contains(s.triple)) {
                bad.push_back(std::string(v.stage) + " " + where + ": step missing from the subgraph");
            }
        }
    };

    auto observer = [&](const planner::StepView& v) {
        if (v.stage != "decompose" && v.memory.status.size() != v.sub_objectives.size()) {
            bad.push_back(std::string(v.stage) + ": |S| != |O|");
        }
        if (v.stage == "decompose" && v.sub_objectives.empty()) bad.push_back("decompose: no sub-objectives");
        if (v.frontier.iteration > config.max_depth) bad.push_back(std::string(v.stage) + ": iteration past max_depth");
        for (const auto& p : v.memory.paths) check_path(p, v, "memory path");
        for (const auto& p : v.frontier.active) check_path(p, v, "active path");
        for (const auto& t : v.frontier.tail_entities) {
            if (!topics.contains(t) && !v.frontier.candidate_pool.contains(t)) {
                bad.push_back(std::string(v.stage) + ": tail " + t.value + " outside pool and topics");
            }
        }

        const auto& sg = v.memory.subgraph;
        Snapshot now{sg.entities.size(), sg.relations.size(), sg.triplets.size(), v.frontier.candidate_pool.size(),
                     v.frontier.tail_entities};
        if (!no_memory && (now.entities < prev.entities || now.relations < prev.relations ||
                           now.triplets < prev.triplets || now.pool < prev.pool)) {
            bad.push_back(std::string(v.stage) + ": subgraph or candidate pool shrank");
        }

        if (v.decision) {
            for (const auto& e : v.decision->backtrack_entities) {
                if (!v.frontier.candidate_pool.contains(e)) bad.push_back("reflect: backtrack entity outside the pool");
                if (std::find(prev.tails.begin(), prev.tails.end(), e) != prev.tails.end()) {
                    bad.push_back("reflect: backtrack entity was already a tail");
                }
            }
            if (!v.decision->add && !v.decision->backtrack_entities.empty()) bad.push_back("reflect: add=false with entities");
            if (config.ablations.no_reflection && v.decision->add) bad.push_back("reflect: add under no_reflection");
        }
        prev = std::move(now);
    };

    auto result = planner::run_question(question, config, backends, observer);
    if (result.iterations > config.max_depth) bad.push_back("run exceeded max_depth");
    if (result.status == planner::RunStatus::failed) bad.push_back("run failed: " + result.error);

    if (config.ablations.fixed_breadth) {
        auto n = *config.ablations.fixed_breadth;
        for (const auto* e : result.trace.of_kind(planner::EventKind::selection)) {
            const auto& p = e->payload;
            if (p.value("stage", "") == "decompose" || !p.contains("selected")) continue;
            if (p["selected"].size() > n) bad.push_back("fixed_breadth exceeded in " + p.value("stage", ""));
        }
    }
    if (outcome) *outcome = std::move(result);
    return bad;
}

}  // namespace kgreason::testing
