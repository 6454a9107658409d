#include "kgreason/cli/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "kgreason/harness/eval.hpp"
#include "kgreason/kg/sparql.hpp"
#include "kgreason/llm/chat_client.hpp"
#include "kgreason/llm/scripted.hpp"
#include "kgreason/recall/embedding_scorer.hpp"

namespace kgreason::cli {

namespace {

using nlohmann::json;

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::string kg, kg_format, endpoint, llm, script, model, base_url, depth, parallel, out, prompts, scorer;
    std::vector<std::string> ablate;
};

std::string api_key() {
    const char* v = std::getenv(llm::kApiKeyEnv);
    return v ? std::string(v) : std::string();
}

AppConfig build_config(const Flags& f) {
    AppConfig c;
    if (!f.config.empty()) apply_config_file(c, f.config);
    for (const auto& kv : f.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!f.kg.empty()) {
        c.set("kg.mode", "memory");
        c.set("kg.path", f.kg);
    }
    if (!f.kg_format.empty()) c.set("kg.format", f.kg_format);
    if (!f.endpoint.empty()) {
        c.set("kg.mode", "sparql");
        c.set("kg.endpoint", f.endpoint);
    }
    if (!f.script.empty()) {
        c.set("llm.mode", "scripted");
        c.set("llm.script", f.script);
    }
    if (!f.llm.empty()) c.set("llm.mode", f.llm);
    if (!f.model.empty()) c.set("llm.model", f.model);
    if (!f.base_url.empty()) c.set("llm.base_url", f.base_url);
    if (!f.depth.empty()) c.set("planner.max_depth", f.depth);
    if (!f.ablate.empty()) c.ablate = f.ablate;
    if (!f.parallel.empty()) c.set("eval.parallel", f.parallel);
    if (!f.out.empty()) c.set("output.dir", f.out);
    if (!f.prompts.empty()) c.set("prompts.dir", f.prompts);
    if (!f.scorer.empty()) c.set("recall.scorer", f.scorer);
    return c;
}

void add_common_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--config", f.config, "Config file (key = value lines)");
    cmd.add_option("--set", f.sets, "Override one config key: key=value (repeatable)");
    cmd.add_option("--kg", f.kg, "Triple file for the in-memory graph");
    cmd.add_option("--kg-format", f.kg_format, "tsv or ntriples (default: from the extension)");
    cmd.add_option("--endpoint", f.endpoint, "SPARQL endpoint URL");
    cmd.add_option("--llm", f.llm, "http or scripted");
    cmd.add_option("--script", f.script, "Scripted responder fixture (JSON)");
    cmd.add_option("--model", f.model, "Chat model name");
    cmd.add_option("--base-url", f.base_url, "Chat-completions base URL");
    cmd.add_option("--depth", f.depth, "Maximum exploration depth");
    cmd.add_option("--ablate", f.ablate,
                   "Ablation: no_guidance, no_memory, no_reflection, fixed_breadth=N, depth=N; '+' combines "
                   "(repeatable)");
    cmd.add_option("--parallel", f.parallel, "Questions evaluated concurrently");
    cmd.add_option("--out", f.out, "Output directory");
    cmd.add_option("--prompts", f.prompts, "Prompt template directory");
    cmd.add_option("--scorer", f.scorer, "Recall scorer: trigram or embedding");
}

std::string stamp() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "run-%Y%m%d-%H%M%S", &tm);
    return buf;
}

planner::PlannerConfig variant_config(const AppConfig& c, const std::vector<std::string>& ablate) {
    std::string joined;
    for (const auto& a : ablate) {
        if (!joined.empty()) joined += '+';
        joined += a;
    }
    if (joined.empty()) return c.planner;
    try {
        return harness::parse_variant(joined, c.planner).config;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::vector<planner::Entity> parse_topics(const std::vector<std::string>& topics) {
    std::vector<planner::Entity> out;
    for (const auto& t : topics) {
        auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == t.size()) {
            throw ConfigError("--topic expects mid=Label, got '" + t + "'");
        }
        out.push_back({kg::EntityId(t.substr(0, eq)), t.substr(eq + 1)});
    }
    return out;
}

int cmd_run(const AppConfig& config, const std::string& question, const std::vector<std::string>& topics,
            std::ostream& out, std::ostream& err) {
    planner::Question q{question, parse_topics(topics)};
    if (q.text.empty()) throw ConfigError("run needs --question");
    if (q.topic_entities.empty()) throw ConfigError("run needs at least one --topic mid=Label");
    auto pcfg = variant_config(config, config.ablate);

    auto wiring = wire(config);
    auto dir = make_run_dir(config.output_dir);
    auto outcome = planner::run_question(q, pcfg, wiring.backends());
    auto trace_path = dir / "trace.jsonl";
    outcome.trace.write(trace_path);

    auto totals = planner::usage_total(outcome.trace);
    double seconds = 0.0;
    if (auto finals = outcome.trace.of_kind(planner::EventKind::final); !finals.empty()) {
        seconds = finals.back()->payload.value("seconds", 0.0);
    }
    json result = {{"answer", outcome.answer},
                   {"status", planner::to_string(outcome.status)},
                   {"reason", outcome.verdict.reason},
                   {"iterations", outcome.iterations},
                   {"calls", totals.calls},
                   {"input_tokens", totals.usage.input_tokens},
                   {"output_tokens", totals.usage.output_tokens},
                   {"total_tokens", totals.usage.total()},
                   {"seconds", seconds},
                   {"trace", trace_path.string()}};
    if (!outcome.error.empty()) result["error"] = outcome.error;
    std::ofstream(dir / "result.json") << result.dump(2) << '\n';

    out << "answer: " << outcome.answer << '\n';
    if (outcome.status == planner::RunStatus::exhausted) {
        out << "note: exhausted (depth budget of " << pcfg.max_depth << " spent; forced answer)\n";
    }
    out << "status: " << planner::to_string(outcome.status) << '\n'
        << "reason: " << outcome.verdict.reason << '\n'
        << "iterations: " << outcome.iterations << '\n'
        << "calls: " << totals.calls << '\n'
        << "tokens: " << totals.usage.input_tokens << " in, " << totals.usage.output_tokens << " out, "
        << totals.usage.total() << " total\n"
        << "seconds: " << seconds << '\n'
        << "trace: " << trace_path.string() << '\n';
    if (outcome.status == planner::RunStatus::failed) {
        err << "error: " << outcome.error << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_eval(const AppConfig& config, std::ostream& out, std::ostream& err, const std::atomic<bool>* stop) {
    harness::DatasetFlavor flavor;
    try {
        flavor = harness::dataset_flavor_from_string(config.flavor);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (config.dataset.empty()) throw ConfigError("eval needs --dataset");

    std::vector<harness::Variant> variants{{"full", config.planner}};
    for (const auto& a : config.ablate) {
        try {
            variants.push_back(harness::parse_variant(a, config.planner));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    auto dataset = harness::load_dataset(config.dataset, flavor);
    for (const auto& s : dataset.skipped) {
        err << "warning: record " << s.index << " (" << s.id << ") skipped: " << s.reason << '\n';
    }
    auto wiring = wire(config);
    auto dir = make_run_dir(config.output_dir);

    harness::EvalOptions opts;
    opts.parallelism = config.parallel;
    opts.out_dir = dir;
    opts.skipped = dataset.skipped;
    opts.stop = stop;
    auto reports = harness::ablation_matrix(dataset.records, variants, wiring.backends(), opts);

    std::string tsv = harness::summary_tsv_header();
    bool interrupted = reports.size() < variants.size();
    for (const auto& [name, r] : reports) {
        tsv += harness::summary_tsv_row(r);
        interrupted = interrupted || r.interrupted;
    }
    std::ofstream(dir / "summary.tsv") << tsv;

    out << harness::summary_table(reports);
    out << "report: " << dir.string() << '\n';
    if (interrupted) {
        err << "interrupted: partial results written to " << dir.string() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

std::string summarize(const planner::TraceEvent& e) {
    const auto& p = e.payload;
    auto str = [&](const char* k) { return p.contains(k) ? (p[k].is_string() ? p[k].get<std::string>() : p[k].dump()) : ""; };
    switch (e.kind) {
        case planner::EventKind::kg_query: {
            std::string s = str("op") + " " + str("entity");
            if (p.contains("relation")) s += " " + str("relation");
            if (p.contains("direction")) s += " " + str("direction");
            if (p.contains("results")) s += " -> " + std::to_string(p["results"].size()) + " results";
            if (p.contains("label")) s += " -> " + str("label");
            return s;
        }
        case planner::EventKind::llm_call: {
            std::string s = str("template") + " (" + str("stage") + ")";
            if (e.usage) {
                s += " tokens " + std::to_string(e.usage->input_tokens) + "/" + std::to_string(e.usage->output_tokens);
            }
            return s + "\n    response: " + str("response");
        }
        case planner::EventKind::selection:
            return str("stage") + " selected " + str("selected") +
                   (p.contains("sub_objectives") ? " " + str("sub_objectives") : "");
        case planner::EventKind::memory_update: return "status " + str("status");
        case planner::EventKind::verdict: return "sufficient=" + str("sufficient") + " answer=" + str("answer");
        case planner::EventKind::reflection: return "add=" + str("add") + " backtrack=" + str("backtrack");
        case planner::EventKind::final: return str("status") + " answer=" + str("answer");
    }
    return p.dump();
}

int cmd_inspect(const std::filesystem::path& path, bool raw, std::ostream& out) {
    auto trace = planner::RunTrace::read(path);
    for (const auto& e : trace.events()) {
        if (raw) {
            out << e.to_json().dump(2) << '\n';
            continue;
        }
        out << '#' << e.seq << " [" << e.iteration << "] " << planner::to_string(e.kind) << ": " << summarize(e)
            << '\n';
    }
    auto totals = planner::usage_total(trace);
    out << "events: " << trace.events().size() << ", llm calls: " << totals.calls
        << ", tokens: " << totals.usage.input_tokens << " in / " << totals.usage.output_tokens << " out\n";
    return kExitOk;
}

}  // namespace

Wiring wire(const AppConfig& config) {
    config.validate();
    Wiring w;
    if (config.kg_mode == KgMode::memory) {
        auto store = std::make_unique<kg::TripleStore>();
        store->load(config.kg_path, config.effective_kg_format());
        w.kg = std::move(store);
    } else {
        w.kg = std::make_unique<kg::SparqlClient>(kg::SparqlClientOptions{config.kg_endpoint});
    }
    if (config.llm_mode == LlmMode::scripted) {
        w.llm = std::make_unique<llm::ScriptedResponder>(llm::ScriptedResponder::from_file(config.llm_script));
    } else {
        llm::ChatClientOptions o;
        o.base_url = config.llm_base_url;
        o.api_key = api_key();
        w.llm = std::make_unique<llm::ChatClient>(std::move(o));
    }
    if (config.scorer == ScorerMode::embedding) {
        recall::EmbeddingScorerOptions o;
        o.url = config.recall_endpoint;
        o.model = config.recall_model;
        o.api_key = api_key();
        w.scorer = std::make_unique<recall::EmbeddingScorer>(std::move(o));
    } else {
        w.scorer = std::make_unique<recall::TrigramScorer>();
    }
    w.prompts = planner::PromptLibrary::load(config.prompts_dir.empty() ? planner::PromptLibrary::default_dir()
                                                                         : config.prompts_dir);
    return w;
}

std::filesystem::path make_run_dir(const std::filesystem::path& base) {
    namespace fs = std::filesystem;
    fs::create_directories(base);
    auto name = stamp();
    auto dir = base / name;
    for (int i = 1; fs::exists(dir); ++i) dir = base / (name + "-" + std::to_string(i));
    fs::create_directories(dir);

    auto latest = base / "latest";
    std::error_code ec;
    if (fs::is_symlink(fs::symlink_status(latest, ec))) fs::remove(latest, ec);
    if (!fs::exists(fs::symlink_status(latest, ec))) fs::create_directory_symlink(dir.filename(), latest, ec);
    return dir;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const std::atomic<bool>* stop) {
    CLI::App app{"Knowledge-graph question answering with planning, memory and reflection", "kgreason"};
    app.require_subcommand(1);

    Flags run_flags, eval_flags;
    std::string question, dataset, flavor, trace_path;
    std::vector<std::string> topics;
    bool raw = false;

    auto* run = app.add_subcommand("run", "Answer one question");
    add_common_flags(*run, run_flags);
    run->add_option("--question,-q", question, "Question text")->required();
    run->add_option("--topic,-t", topics, "Topic entity as mid=Label (repeatable)")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a dataset, optionally against ablation variants");
    add_common_flags(*eval, eval_flags);
    eval->add_option("--dataset,-d", dataset, "Dataset file");
    eval->add_option("--flavor", flavor, "normalized, cwq, webqsp or grailqa");

    auto* inspect = app.add_subcommand("inspect-trace", "Pretty-print a JSON-lines trace");
    inspect->add_option("trace", trace_path, "Trace file")->required();
    inspect->add_flag("--raw", raw, "Print every event as indented JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(build_config(run_flags), question, topics, out, err);
        if (*eval) {
            auto config = build_config(eval_flags);
            if (!dataset.empty()) config.set("eval.dataset", dataset);
            if (!flavor.empty()) config.set("eval.flavor", flavor);
            return cmd_eval(config, out, err, stop);
        }
        if (*inspect) return cmd_inspect(trace_path, raw, out);
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace kgreason::cli
