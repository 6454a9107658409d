#pragma once
// Batch evaluation: run every record, score with Hits@1, account calls,
// tokens and time per question, and persist the report with one trace file
// per question.

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kgreason/harness/dataset.hpp"
#include "kgreason/planner/run.hpp"

namespace kgreason::harness {

struct QuestionResult {
    std::string id;
    std::string question;
    std::string predicted;
    std::vector<std::string> gold;
    bool correct = false;
    std::string status;  // answered, exhausted, failed, skipped, not_run
    std::size_t iterations = 0;
    llm::Usage usage;
    std::size_t calls = 0;
    double seconds = 0.0;
    std::string error;
    std::string tag;
};

struct EvalReport {
    std::string method = "full";
    std::vector<QuestionResult> per_question;
    bool interrupted = false;

    std::size_t correct() const;
    // Means over every row, skipped and failed rows included.
    double hits_at_1() const;
    double mean_calls() const;
    double mean_input_tokens() const;
    double mean_output_tokens() const;
    double mean_total_tokens() const;
    double mean_seconds() const;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

struct EvalOptions {
    std::size_t parallelism = 1;
    // report.json, summary.tsv and traces/<id>.jsonl go here when set.
    std::optional<std::filesystem::path> out_dir;
    // Records dropped at load time; reported as incorrect rows.
    std::vector<SkippedRecord> skipped;
    // Checked between questions; questions not started are reported as not_run.
    const std::atomic<bool>* stop = nullptr;
    std::string method = "full";
};

EvalReport run_eval(const std::vector<DatasetRecord>& records, const planner::PlannerConfig& config,
                    const planner::Backends& backends, const EvalOptions& options = {});

// A named planner configuration. Names are '+'-joined tokens:
// full, no_guidance, no_memory, no_reflection, fixed_breadth=N, depth=N.
struct Variant {
    std::string name;
    planner::PlannerConfig config;
};

// Throws std::invalid_argument on an unknown token.
Variant parse_variant(std::string_view name, const planner::PlannerConfig& base);

// One report per variant; with out_dir set, variant i is persisted under out_dir/<name>/.
std::vector<std::pair<std::string, EvalReport>> ablation_matrix(const std::vector<DatasetRecord>& records,
                                                                const std::vector<Variant>& variants,
                                                                const planner::Backends& backends,
                                                                const EvalOptions& options = {});

// File-name-safe form of a question id.
std::string trace_file_name(std::string_view id);

std::string summary_tsv_header();
std::string summary_tsv_row(const EvalReport& report);
// Aligned text table: Method, Hits@1, LLM Call, Input Token, Output Token, Total Token, Time (s).
std::string summary_table(const std::vector<std::pair<std::string, EvalReport>>& reports);

void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace kgreason::harness
