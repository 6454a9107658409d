#include "kgreason/planner/trace.hpp"

#include <fstream>
#include <sstream>

namespace kgreason::planner {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 7> kKinds = {{
    {EventKind::kg_query, "kg_query"},
    {EventKind::llm_call, "llm_call"},
    {EventKind::selection, "selection"},
    {EventKind::memory_update, "memory_update"},
    {EventKind::verdict, "verdict"},
    {EventKind::reflection, "reflection"},
    {EventKind::final, "final"},
}};

std::string dump_line(const nlohmann::json& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace

std::string_view to_string(EventKind kind) {
    for (const auto& [k, name] : kKinds) {
        if (k == kind) return name;
    }
    return "unknown";
}

EventKind event_kind_from_string(std::string_view s) {
    for (const auto& [k, name] : kKinds) {
        if (name == s) return k;
    }
    throw std::invalid_argument("unknown trace event kind: " + std::string(s));
}

nlohmann::json TraceEvent::to_json() const {
    nlohmann::json j = {{"seq", seq}, {"kind", to_string(kind)}, {"iteration", iteration}, {"payload", payload}};
    if (usage) j["usage"] = {{"input_tokens", usage->input_tokens}, {"output_tokens", usage->output_tokens}};
    return j;
}

TraceEvent TraceEvent::from_json(const nlohmann::json& j) {
    TraceEvent e;
    e.seq = j.at("seq").get<uint64_t>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.iteration = j.at("iteration").get<std::size_t>();
    e.payload = j.value("payload", nlohmann::json::object());
    if (j.contains("usage")) {
        e.usage = llm::Usage{j["usage"].at("input_tokens").get<uint64_t>(), j["usage"].at("output_tokens").get<uint64_t>()};
    }
    return e;
}

void RunTrace::add(EventKind kind, std::size_t iteration, nlohmann::json payload, std::optional<llm::Usage> usage) {
    events_.push_back({events_.size(), kind, iteration, std::move(payload), usage});
}

std::vector<const TraceEvent*> RunTrace::of_kind(EventKind kind) const {
    std::vector<const TraceEvent*> out;
    for (const auto& e : events_) {
        if (e.kind == kind) out.push_back(&e);
    }
    return out;
}

std::string RunTrace::to_jsonl() const {
    std::string out;
    for (const auto& e : events_) {
        out += dump_line(e.to_json());
        out += '\n';
    }
    return out;
}

RunTrace RunTrace::from_jsonl(std::string_view text) {
    RunTrace t;
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw std::invalid_argument("trace line " + std::to_string(line_no) + " is not JSON");
        try {
            t.events_.push_back(TraceEvent::from_json(j));
        } catch (const std::exception& e) {
            throw std::invalid_argument("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return t;
}

void RunTrace::write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write trace: " + path.string());
    out << to_jsonl();
    if (!out) throw std::runtime_error("failed writing trace: " + path.string());
}

RunTrace RunTrace::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_jsonl(buf.str());
}

UsageTotals usage_total(const RunTrace& trace) {
    UsageTotals t;
    for (const auto& e : trace.events()) {
        if (e.kind != EventKind::llm_call) continue;
        ++t.calls;
        if (e.usage) t.usage += *e.usage;
    }
    return t;
}

nlohmann::json strip_timing(nlohmann::json event) {
    if (event.contains("payload") && event["payload"].is_object()) {
        event["payload"].erase("latency_ms");
        event["payload"].erase("seconds");
    }
    return event;
}

}  // namespace kgreason::planner
