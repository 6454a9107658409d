#pragma once
// Commands behind the kgreason binary: run, eval, inspect-trace.

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <memory>

#include "kgreason/cli/config.hpp"
#include "kgreason/planner/run.hpp"

namespace kgreason::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

// Concrete backends built from a validated config.
struct Wiring {
    std::unique_ptr<kg::KnowledgeGraph> kg;
    std::unique_ptr<llm::LanguageModel> llm;
    std::unique_ptr<recall::RelevanceScorer> scorer;
    planner::PromptLibrary prompts;

    planner::Backends backends() const { return {*kg, *llm, *scorer, prompts}; }
};

Wiring wire(const AppConfig& config);

// A fresh run-YYYYmmdd-HHMMSS directory under base; base/latest is pointed at it.
std::filesystem::path make_run_dir(const std::filesystem::path& base);

// Parses argv and dispatches. Never throws; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* stop = nullptr);

}  // namespace kgreason::cli
