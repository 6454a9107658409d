#pragma once
// The planning loop for one question: decompose once, then repeat
// relation exploration -> entity exploration -> memory update -> evaluation
// -> reflection until the model can answer or the depth budget runs out.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgreason/kg/backend.hpp"
#include "kgreason/llm/model.hpp"
#include "kgreason/planner/prompts.hpp"
#include "kgreason/planner/state.hpp"
#include "kgreason/planner/trace.hpp"
#include "kgreason/recall/scorer.hpp"

namespace kgreason::planner {

struct Backends {
    const kg::KnowledgeGraph& kg;
    const llm::LanguageModel& llm;
    const recall::RelevanceScorer& scorer;
    const PromptLibrary& prompts;
};

// Snapshot handed to an observer after each operation.
struct StepView {
    std::string_view stage;  // decompose, explore_relations, explore_entities, update_memory, evaluate, reflect
    const std::vector<std::string>& sub_objectives;
    const Memory& memory;
    const Frontier& frontier;
    const PlannerConfig& config;
    const ReflectionDecision* decision = nullptr;
};

using StepObserver = std::function<void(const StepView&)>;

// Relations that describe schema rather than facts; never offered to the model.
bool is_schema_relation(std::string_view relation);

class QuestionRun {
public:
    QuestionRun(Question question, PlannerConfig config, const Backends& backends);

    void set_observer(StepObserver observer) { observer_ = std::move(observer); }

    const std::vector<std::string>& decompose();
    // Advances the iteration counter; under no_memory, drops earlier retrievals.
    void begin_iteration();
    void explore_relations();
    void explore_entities();
    void update_memory();
    // forced: the last-chance answer after the depth budget is spent.
    Verdict evaluate(bool forced = false);
    ReflectionDecision reflect();

    const Question& question() const { return question_; }
    const PlannerConfig& config() const { return config_; }
    const std::vector<std::string>& sub_objectives() const { return sub_objectives_; }
    const Memory& memory() const { return memory_; }
    const Frontier& frontier() const { return frontier_; }
    const RunTrace& trace() const { return trace_; }
    RunTrace& trace() { return trace_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    // Raw "A" of the most recent evaluation, even when it was not sufficient.
    const std::string& last_answer_text() const { return last_answer_text_; }

    std::string label(const kg::EntityId& e);

private:
    std::vector<kg::RelationId> kg_relations(const kg::EntityId& e, kg::Direction d);
    std::vector<kg::EntityId> kg_entities(const kg::EntityId& e, const kg::RelationId& r, kg::Direction d);

    // One model exchange, recorded in the trace.
    std::string ask(PromptId id, const std::string& prompt, std::string_view stage);
    // Asks, parses, and on a parse failure re-prompts once with a reminder.
    // nullopt after the second failure (recorded as a warning).
    template <typename Parse>
    auto ask_parsed(PromptId id, const Bindings& bindings, std::string_view stage, std::string_view shape, Parse parse)
        -> std::optional<decltype(parse(std::string{}))>;

    std::string render_status() const;
    std::string render_paths();
    std::string render_step(const PathStep& s);
    void warn(std::string message);
    void notify(std::string_view stage, const ReflectionDecision* decision = nullptr);

    Question question_;
    PlannerConfig config_;
    Backends backends_;
    StepObserver observer_;

    std::vector<std::string> sub_objectives_;
    Memory memory_;
    Frontier frontier_;
    std::vector<ReasoningPath> next_paths_;
    std::map<kg::EntityId, std::string> labels_;
    RunTrace trace_;
    std::vector<std::string> warnings_;
    std::string last_answer_text_;
};

enum class RunStatus { answered, exhausted, failed };
std::string_view to_string(RunStatus s);

struct RunOutcome {
    Verdict verdict;
    std::string answer;  // verdict.answer, or the hedged forced answer when exhausted
    RunStatus status = RunStatus::failed;
    std::size_t iterations = 0;
    std::string error;
    std::vector<std::string> sub_objectives;
    RunTrace trace;
};

// Never throws for backend failures: they end the run with status failed and
// the partial trace.
RunOutcome run_question(const Question& question, const PlannerConfig& config, const Backends& backends,
                        StepObserver observer = {});

}  // namespace kgreason::planner
