#pragma once
// Ordered record of everything a question run did, persisted as JSON Lines:
// {"seq", "kind", "iteration", "payload", "usage"?} per line.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgreason/llm/model.hpp"

namespace kgreason::planner {

enum class EventKind { kg_query, llm_call, selection, memory_update, verdict, reflection, final };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view s);

struct TraceEvent {
    uint64_t seq = 0;
    EventKind kind = EventKind::selection;
    std::size_t iteration = 0;
    nlohmann::json payload;
    std::optional<llm::Usage> usage;

    nlohmann::json to_json() const;
    static TraceEvent from_json(const nlohmann::json& j);
};

class RunTrace {
public:
    void add(EventKind kind, std::size_t iteration, nlohmann::json payload,
             std::optional<llm::Usage> usage = std::nullopt);

    const std::vector<TraceEvent>& events() const { return events_; }
    std::vector<const TraceEvent*> of_kind(EventKind kind) const;

    std::string to_jsonl() const;
    static RunTrace from_jsonl(std::string_view text);

    void write(const std::filesystem::path& path) const;
    static RunTrace read(const std::filesystem::path& path);

private:
    std::vector<TraceEvent> events_;
};

struct UsageTotals {
    llm::Usage usage;
    std::size_t calls = 0;
};

// Sum over llm_call events.
UsageTotals usage_total(const RunTrace& trace);

// Wall-clock fields ("latency_ms", "seconds") that differ between otherwise
// identical runs.
nlohmann::json strip_timing(nlohmann::json event);

}  // namespace kgreason::planner
