#include "kgreason/harness/eval.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

namespace kgreason::harness {

namespace {

using nlohmann::json;

template <typename F>
double mean_of(const std::vector<QuestionResult>& rows, F f) {
    if (rows.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : rows) sum += static_cast<double>(f(r));
    return sum / static_cast<double>(rows.size());
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

QuestionResult blank_row(const DatasetRecord& r) {
    QuestionResult row;
    row.id = r.id;
    row.question = r.question.text;
    row.gold = r.answers;
    row.tag = r.tag;
    row.status = "not_run";
    return row;
}

QuestionResult evaluate_one(const DatasetRecord& record, const planner::PlannerConfig& config,
                            const planner::Backends& backends, const std::optional<std::filesystem::path>& out_dir) {
    auto row = blank_row(record);
    auto start = std::chrono::steady_clock::now();
    planner::RunOutcome outcome;
    try {
        outcome = planner::run_question(record.question, config, backends);
    } catch (const std::exception& e) {
        outcome.status = planner::RunStatus::failed;
        outcome.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    row.status = std::string(planner::to_string(outcome.status));
    row.predicted = outcome.answer;
    row.iterations = outcome.iterations;
    row.error = outcome.error;
    row.correct = outcome.status != planner::RunStatus::failed && hits_at_1(row.predicted, row.gold);
    auto totals = planner::usage_total(outcome.trace);
    row.usage = totals.usage;
    row.calls = totals.calls;

    if (out_dir) {
        try {
            outcome.trace.write(*out_dir / "traces" / (trace_file_name(record.id) + ".jsonl"));
        } catch (const std::exception& e) {
            if (!row.error.empty()) row.error += "; ";
            row.error += e.what();
        }
    }
    return row;
}

}  // namespace

std::size_t EvalReport::correct() const {
    std::size_t n = 0;
    for (const auto& r : per_question) n += r.correct ? 1 : 0;
    return n;
}

double EvalReport::hits_at_1() const {
    return per_question.empty() ? 0.0 : static_cast<double>(correct()) / static_cast<double>(per_question.size());
}
double EvalReport::mean_calls() const {
    return mean_of(per_question, [](const QuestionResult& r) { return r.calls; });
}
double EvalReport::mean_input_tokens() const {
    return mean_of(per_question, [](const QuestionResult& r) { return r.usage.input_tokens; });
}
double EvalReport::mean_output_tokens() const {
    return mean_of(per_question, [](const QuestionResult& r) { return r.usage.output_tokens; });
}
double EvalReport::mean_total_tokens() const {
    return mean_of(per_question, [](const QuestionResult& r) { return r.usage.total(); });
}
double EvalReport::mean_seconds() const {
    return mean_of(per_question, [](const QuestionResult& r) { return r.seconds; });
}

json EvalReport::to_json() const {
    json rows = json::array();
    for (const auto& r : per_question) {
        json j = {{"id", r.id},
                  {"question", r.question},
                  {"predicted", r.predicted},
                  {"gold", r.gold},
                  {"correct", r.correct},
                  {"status", r.status},
                  {"iterations", r.iterations},
                  {"calls", r.calls},
                  {"input_tokens", r.usage.input_tokens},
                  {"output_tokens", r.usage.output_tokens},
                  {"total_tokens", r.usage.total()},
                  {"seconds", r.seconds}};
        if (!r.error.empty()) j["error"] = r.error;
        if (!r.tag.empty()) j["tag"] = r.tag;
        rows.push_back(std::move(j));
    }
    return {{"method", method},
            {"questions", per_question.size()},
            {"correct", correct()},
            {"hits_at_1", hits_at_1()},
            {"mean_calls", mean_calls()},
            {"mean_input_tokens", mean_input_tokens()},
            {"mean_output_tokens", mean_output_tokens()},
            {"mean_total_tokens", mean_total_tokens()},
            {"mean_seconds", mean_seconds()},
            {"interrupted", interrupted},
            {"per_question", rows}};
}

EvalReport EvalReport::from_json(const json& j) {
    EvalReport r;
    r.method = j.value("method", "full");
    r.interrupted = j.value("interrupted", false);
    for (const auto& q : j.at("per_question")) {
        QuestionResult row;
        row.id = q.at("id").get<std::string>();
        row.question = q.value("question", "");
        row.predicted = q.value("predicted", "");
        row.gold = q.value("gold", std::vector<std::string>{});
        row.correct = q.at("correct").get<bool>();
        row.status = q.value("status", "");
        row.iterations = q.value("iterations", std::size_t{0});
        row.calls = q.value("calls", std::size_t{0});
        row.usage.input_tokens = q.value("input_tokens", uint64_t{0});
        row.usage.output_tokens = q.value("output_tokens", uint64_t{0});
        row.seconds = q.value("seconds", 0.0);
        row.error = q.value("error", "");
        row.tag = q.value("tag", "");
        r.per_question.push_back(std::move(row));
    }
    return r;
}

std::string trace_file_name(std::string_view id) {
    std::string out;
    for (char c : id) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
        out += ok ? c : '_';
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

EvalReport run_eval(const std::vector<DatasetRecord>& records, const planner::PlannerConfig& config,
                    const planner::Backends& backends, const EvalOptions& options) {
    if (options.parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
    config.validate();

    EvalReport report;
    report.method = options.method;
    report.per_question.reserve(records.size() + options.skipped.size());
    for (const auto& r : records) report.per_question.push_back(blank_row(r));

    std::atomic<std::size_t> next{0};
    auto stopped = [&] { return options.stop && options.stop->load(); };
    auto worker = [&] {
        for (;;) {
            if (stopped()) return;
            auto i = next.fetch_add(1);
            if (i >= records.size()) return;
            report.per_question[i] = evaluate_one(records[i], config, backends, options.out_dir);
        }
    };

    auto workers = std::min(options.parallelism, std::max<std::size_t>(records.size(), 1));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    for (const auto& s : options.skipped) {
        QuestionResult row;
        row.id = s.id;
        row.status = "skipped";
        row.error = s.reason;
        report.per_question.push_back(std::move(row));
    }
    for (const auto& row : report.per_question) {
        if (row.status == "not_run") report.interrupted = true;
    }
    if (options.out_dir) write_report(report, *options.out_dir);
    return report;
}

Variant parse_variant(std::string_view name, const planner::PlannerConfig& base) {
    Variant v{std::string(name), base};
    if (name.empty()) throw std::invalid_argument("empty variant name");
    auto number = [&](std::string_view token, std::string_view value) -> std::size_t {
        std::size_t n = 0;
        if (value.empty()) throw std::invalid_argument("variant token '" + std::string(token) + "' needs a number");
        for (char c : value) {
            if (c < '0' || c > '9' || n > 1'000'000) {
                throw std::invalid_argument("variant token '" + std::string(token) + "' needs a positive integer");
            }
            n = n * 10 + static_cast<std::size_t>(c - '0');
        }
        if (n < 1) throw std::invalid_argument("variant token '" + std::string(token) + "' must be >= 1");
        return n;
    };

    std::size_t start = 0;
    while (start <= name.size()) {
        auto end = name.find('+', start);
        if (end == std::string_view::npos) end = name.size();
        auto token = name.substr(start, end - start);
        start = end + 1;
        if (token == "full") {
        } else if (token == "no_guidance") {
            v.config.ablations.no_guidance = true;
        } else if (token == "no_memory") {
            v.config.ablations.no_memory = true;
        } else if (token == "no_reflection") {
            v.config.ablations.no_reflection = true;
        } else if (token.starts_with("fixed_breadth=")) {
            v.config.ablations.fixed_breadth = number(token, token.substr(14));
        } else if (token.starts_with("depth=")) {
            v.config.max_depth = number(token, token.substr(6));
        } else {
            throw std::invalid_argument("unknown variant token '" + std::string(token) +
                                        "' (valid: full, no_guidance, no_memory, no_reflection, fixed_breadth=N, "
                                        "depth=N)");
        }
        if (end == name.size()) break;
    }
    return v;
}

std::vector<std::pair<std::string, EvalReport>> ablation_matrix(const std::vector<DatasetRecord>& records,
                                                                const std::vector<Variant>& variants,
                                                                const planner::Backends& backends,
                                                                const EvalOptions& options) {
    if (variants.empty()) throw std::invalid_argument("ablation matrix needs at least one variant");
    std::vector<std::pair<std::string, EvalReport>> out;
    for (const auto& v : variants) {
        auto opts = options;
        opts.method = v.name;
        if (options.out_dir) opts.out_dir = *options.out_dir / trace_file_name(v.name);
        out.emplace_back(v.name, run_eval(records, v.config, backends, opts));
        if (options.stop && options.stop->load()) break;
    }
    return out;
}

std::string summary_tsv_header() {
    return "Method\tHits@1\tLLM Call\tInput Token\tOutput Token\tTotal Token\tTime (s)\n";
}

std::string summary_tsv_row(const EvalReport& r) {
    return r.method + "\t" + fixed(r.hits_at_1(), 4) + "\t" + fixed(r.mean_calls(), 2) + "\t" +
           fixed(r.mean_input_tokens(), 2) + "\t" + fixed(r.mean_output_tokens(), 2) + "\t" +
           fixed(r.mean_total_tokens(), 2) + "\t" + fixed(r.mean_seconds(), 3) + "\n";
}

std::string summary_table(const std::vector<std::pair<std::string, EvalReport>>& reports) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Method", "Hits@1", "LLM Call", "Input Token", "Output Token", "Total Token", "Time (s)"});
    for (const auto& [name, r] : reports) {
        cells.push_back({name, fixed(r.hits_at_1(), 3), fixed(r.mean_calls(), 1), fixed(r.mean_input_tokens(), 1),
                         fixed(r.mean_output_tokens(), 1), fixed(r.mean_total_tokens(), 1),
                         fixed(r.mean_seconds(), 2)});
    }
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            auto pad = std::string(width[c] - row[c].size(), ' ');
            out += c == 0 ? row[c] + pad : pad + row[c];
            out += c + 1 < row.size() ? "  " : "\n";
        }
    }
    return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", report.to_json().dump(2, ' ', false, json::error_handler_t::replace) + "\n");
    write_text(dir / "summary.tsv", summary_tsv_header() + summary_tsv_row(report));
}

}  // namespace kgreason::harness
