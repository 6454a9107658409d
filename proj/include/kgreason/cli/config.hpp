#pragma once
// Application configuration. The file format is flat "key = value" lines
// with dotted keys; '#' starts a comment. Command-line flags map onto the
// same keys, so precedence is simply: defaults, then file, then flags.
//
//   kg.mode = memory | sparql        kg.path, kg.format (tsv | ntriples), kg.endpoint
//   llm.mode = http | scripted       llm.base_url, llm.script, llm.model, llm.temperature,
//                                    llm.max_tokens, llm.frequency_penalty, llm.presence_penalty
//   planner.max_depth, planner.ablate (comma-separated variants), planner.fixed_breadth
//   recall.threshold, recall.k, recall.scorer = trigram | embedding, recall.endpoint, recall.model
//   output.dir, prompts.dir, eval.parallel, eval.dataset, eval.flavor
//
// The API key is read from the environment only.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kgreason/kg/triple_store.hpp"
#include "kgreason/planner/state.hpp"

namespace kgreason::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KgMode { memory, sparql };
enum class LlmMode { http, scripted };
enum class ScorerMode { trigram, embedding };

struct AppConfig {
    KgMode kg_mode = KgMode::memory;
    std::filesystem::path kg_path;
    std::optional<kg::TripleFormat> kg_format;  // inferred from the extension when unset
    std::string kg_endpoint;

    LlmMode llm_mode = LlmMode::http;
    std::string llm_base_url = "https://api.openai.com/v1";
    std::filesystem::path llm_script;

    planner::PlannerConfig planner;
    std::vector<std::string> ablate;

    ScorerMode scorer = ScorerMode::trigram;
    std::string recall_endpoint;
    std::string recall_model;

    std::filesystem::path output_dir = "runs";
    std::filesystem::path prompts_dir;  // empty: the bundled templates
    std::size_t parallel = 1;
    std::filesystem::path dataset;
    std::string flavor = "normalized";

    // Throws ConfigError naming the key on an unknown key or a bad value.
    void set(std::string_view key, std::string_view value);
    // Mode-dependent required fields.
    void validate() const;
    kg::TripleFormat effective_kg_format() const;
};

void apply_config_text(AppConfig& config, std::string_view text);
void apply_config_file(AppConfig& config, const std::filesystem::path& path);

}  // namespace kgreason::cli
