#pragma once
// Shared fixtures for the unit and acceptance suites.

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "kgreason/harness/eval.hpp"
#include "kgreason/kg/triple_store.hpp"
#include "kgreason/llm/scripted.hpp"
#include "kgreason/planner/run.hpp"
#include "kgreason/recall/scorer.hpp"

namespace kgreason::testing {

std::filesystem::path data_dir();
std::filesystem::path scratch_dir(const std::string& name);  // fresh, empty

inline constexpr const char* kControlQuestion =
    "Who is in control of the place where the movie The Naked and the Dead takes place?";

planner::Question control_question();
std::unique_ptr<kg::TripleStore> panama_store();
llm::ScriptedResponder panama_script();

// Owns everything a run needs.
struct Rig {
    std::unique_ptr<kg::KnowledgeGraph> kg;
    std::unique_ptr<llm::LanguageModel> llm;
    recall::TrigramScorer scorer;
    planner::PromptLibrary prompts = planner::PromptLibrary::load(planner::PromptLibrary::default_dir());

    planner::Backends backends() const { return {*kg, *llm, scorer, prompts}; }
};

Rig panama_rig();

uint64_t fnv1a(std::string_view s, uint64_t seed = 0);

// A model whose reply is a pure function of (seed, prompt). It reads the
// options out of each prompt and answers with a mix of valid picks,
// hallucinated names, duplicates, prose wrappers and malformed output.
// adversarial: never sufficient, never asks to add entities.
class ChaosResponder final : public llm::LanguageModel {
public:
    ChaosResponder(uint64_t seed, bool adversarial) : seed_(seed), adversarial_(adversarial) {}
    llm::Completion complete(const std::string& prompt, const llm::GenerationConfig& config) const override;
    std::string respond(const std::string& prompt) const;

private:
    uint64_t seed_;
    bool adversarial_;
};

struct RandomGraph {
    std::vector<kg::Triplet> triples;
    std::vector<kg::EntityId> entities;
    std::vector<kg::RelationId> relations;
};

// Entities m.e<i> (most with a type.object.name), relations d<j>.r<k>, a few
// literal objects and duplicate triples.
RandomGraph random_graph(std::mt19937_64& rng, std::size_t max_triples);

planner::Question random_question(std::mt19937_64& rng, const RandomGraph& g, const kg::KnowledgeGraph& kg);

struct FuzzCase {
    enum class Shape { list, object };
    Shape shape = Shape::list;
    std::string text;
    bool valid = false;                 // a well-formed payload is present
    std::vector<std::string> list;      // expected items (valid lists)
    nlohmann::json object;              // expected object (valid objects)
};

std::vector<FuzzCase> fuzz_corpus(uint64_t seed, std::size_t n);

// Totals recomputed from a persisted trace without the library's accounting:
// token counts come from the prompt/response text, ceil(code points / 4).
struct Resummed {
    std::size_t calls = 0;
    uint64_t input_tokens = 0;
    uint64_t output_tokens = 0;
    uint64_t recorded_input = 0;   // as stored on the events
    uint64_t recorded_output = 0;
};
Resummed resum_trace_file(const std::filesystem::path& path);

// Loopback HTTP server on an ephemeral port, stopped on destruction.
class LocalServer {
public:
    using Handler = std::function<void(const std::string& path, const std::map<std::string, std::string>& headers,
                                       const std::string& body, int& status, std::string& response,
                                       std::string& content_type)>;
    explicit LocalServer(Handler handler);
    ~LocalServer();
    LocalServer(const LocalServer&) = delete;
    LocalServer& operator=(const LocalServer&) = delete;

    std::string url(const std::string& path = "") const;
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
    std::thread thread_;
};

// Runs one question with an observer that checks the planner invariants
// after every operation. Returns the violations found (empty when none).
std::vector<std::string> run_with_invariants(const planner::Question& question, const planner::PlannerConfig& config,
                                             const planner::Backends& backends, planner::RunOutcome* outcome = nullptr);

}  // namespace kgreason::testing
