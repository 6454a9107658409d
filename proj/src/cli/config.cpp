#include "kgreason/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "kgreason/harness/dataset.hpp"

namespace kgreason::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string bad(std::string_view key, std::string_view value, std::string_view expected) {
    return std::string(key) + ": invalid value '" + std::string(value) + "' (expected " + std::string(expected) + ")";
}

std::size_t to_count(std::string_view key, std::string_view value, std::size_t min) {
    std::size_t n = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc() || p != value.data() + value.size() || n < min) {
        throw ConfigError(bad(key, value, "an integer >= " + std::to_string(min)));
    }
    return n;
}

double to_real(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        std::string s(value);
        double d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(bad(key, value, "a number"));
    }
}

std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        auto end = value.find(',', start);
        if (end == std::string_view::npos) end = value.size();
        auto item = trim(value.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

}  // namespace

void AppConfig::set(std::string_view key, std::string_view raw) {
    auto value = trim(raw);
    if (key == "kg.mode") {
        if (value == "memory") kg_mode = KgMode::memory;
        else if (value == "sparql") kg_mode = KgMode::sparql;
        else throw ConfigError(bad(key, value, "memory or sparql"));
    } else if (key == "kg.path") {
        kg_path = std::string(value);
    } else if (key == "kg.format") {
        try {
            kg_format = kg::triple_format_from_string(value);
        } catch (const std::exception&) {
            throw ConfigError(bad(key, value, "tsv or ntriples"));
        }
    } else if (key == "kg.endpoint") {
        kg_endpoint = std::string(value);
    } else if (key == "llm.mode") {
        if (value == "http") llm_mode = LlmMode::http;
        else if (value == "scripted") llm_mode = LlmMode::scripted;
        else throw ConfigError(bad(key, value, "http or scripted"));
    } else if (key == "llm.base_url") {
        llm_base_url = std::string(value);
    } else if (key == "llm.script") {
        llm_script = std::string(value);
    } else if (key == "llm.model") {
        planner.generation.model = std::string(value);
    } else if (key == "llm.temperature") {
        planner.generation.temperature = to_real(key, value);
    } else if (key == "llm.max_tokens") {
        planner.generation.max_tokens = static_cast<int>(to_count(key, value, 1));
    } else if (key == "llm.frequency_penalty") {
        planner.generation.frequency_penalty = to_real(key, value);
    } else if (key == "llm.presence_penalty") {
        planner.generation.presence_penalty = to_real(key, value);
    } else if (key == "planner.max_depth") {
        planner.max_depth = to_count(key, value, 1);
    } else if (key == "planner.ablate") {
        ablate = split_list(value);
    } else if (key == "planner.fixed_breadth") {
        if (value.empty() || value == "none") planner.ablations.fixed_breadth.reset();
        else planner.ablations.fixed_breadth = to_count(key, value, 1);
    } else if (key == "recall.threshold") {
        planner.recall.threshold = to_count(key, value, 0);
    } else if (key == "recall.k") {
        planner.recall.k = to_count(key, value, 1);
    } else if (key == "recall.scorer") {
        if (value == "trigram") scorer = ScorerMode::trigram;
        else if (value == "embedding") scorer = ScorerMode::embedding;
        else throw ConfigError(bad(key, value, "trigram or embedding"));
    } else if (key == "recall.endpoint") {
        recall_endpoint = std::string(value);
    } else if (key == "recall.model") {
        recall_model = std::string(value);
    } else if (key == "output.dir") {
        output_dir = std::string(value);
    } else if (key == "prompts.dir") {
        prompts_dir = std::string(value);
    } else if (key == "eval.parallel") {
        parallel = to_count(key, value, 1);
    } else if (key == "eval.dataset") {
        dataset = std::string(value);
    } else if (key == "eval.flavor") {
        try {
            harness::dataset_flavor_from_string(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
        flavor = std::string(value);
    } else if (key == "llm.api_key" || key == "api_key") {
        throw ConfigError(std::string(key) + ": the API key is only read from the environment");
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void AppConfig::validate() const {
    if (kg_mode == KgMode::memory && kg_path.empty()) {
        throw ConfigError("kg.mode = memory needs a triple file (--kg or kg.path)");
    }
    if (kg_mode == KgMode::sparql && kg_endpoint.empty()) {
        throw ConfigError("kg.mode = sparql needs an endpoint (--endpoint or kg.endpoint)");
    }
    if (llm_mode == LlmMode::scripted && llm_script.empty()) {
        throw ConfigError("llm.mode = scripted needs a script (--script or llm.script)");
    }
    if (llm_mode == LlmMode::http && llm_base_url.empty()) throw ConfigError("llm.mode = http needs llm.base_url");
    if (scorer == ScorerMode::embedding && recall_endpoint.empty()) {
        throw ConfigError("recall.scorer = embedding needs recall.endpoint");
    }
    try {
        planner.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

kg::TripleFormat AppConfig::effective_kg_format() const {
    if (kg_format) return *kg_format;
    auto ext = kg_path.extension().string();
    return ext == ".nt" || ext == ".ntriples" ? kg::TripleFormat::ntriples : kg::TripleFormat::tsv;
}

void apply_config_text(AppConfig& config, std::string_view text) {
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (auto hash = line.find(" #"); hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto key = trim(line.substr(0, eq));
        try {
            config.set(key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void apply_config_file(AppConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str());
}

}  // namespace kgreason::cli
