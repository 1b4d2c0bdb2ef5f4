#include "kgcounsel/cli.hpp"

#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgcounsel/config.hpp"
#include "kgcounsel/corpus.hpp"
#include "kgcounsel/engine.hpp"
#include "kgcounsel/eval.hpp"
#include "kgcounsel/io.hpp"
#include "kgcounsel/kg_fixture.hpp"
#include "kgcounsel/service.hpp"

namespace kgcounsel {

using nlohmann::json;

namespace {

struct Settings {
    std::string config_path;
    std::string format = "text";
    std::string input;
    std::string out;
    std::string text;

    std::uint64_t seed = 0;
    bool lenient = false;
    bool strict_sessions = false;
    bool skip_incomplete = false;
    std::string denylist;
    std::string report_path;

    std::optional<std::size_t> max_words;
    std::optional<std::size_t> stride;

    std::string mode = "rag";
    std::string graph;
    std::string index;
    std::string ratings;
    std::string scores;
    std::optional<std::size_t> k;
    bool two_stage = false;
    bool include_snippets = false;
    std::string frozen_clock;

    std::string host;
    std::optional<int> port;
};

EngineConfig load_settings_config(const Settings& s) {
    EngineConfig config = s.config_path.empty() ? EngineConfig{} : load_config_file(s.config_path);
    if (!s.graph.empty()) config.paths.graph = s.graph;
    if (!s.index.empty()) config.paths.index = s.index;
    if (!s.ratings.empty()) config.paths.ratings = s.ratings;
    if (!s.host.empty()) config.server.host = s.host;
    if (s.port) config.server.port = *s.port;
    if (s.max_words) config.retrieval.chunk_max_words = *s.max_words;
    if (s.stride) config.retrieval.chunk_stride_words = *s.stride;
    if (s.two_stage) config.generation.two_stage = true;
    if (s.include_snippets) config.generation.kg_include_snippets = true;
    config.validate();
    return config;
}

void emit_json(std::ostream& out, const json& doc) { out << doc.dump(2) << "\n"; }

json demographics_json(const DemographicReport& d) {
    json literacy = json::object();
    for (std::size_t i = 0; i < kLiteracyBuckets; ++i) {
        literacy[std::string(to_string(static_cast<LiteracyBucket>(i)))] = d.literacy[i];
    }
    return {{"cases", d.case_count},
            {"literacy", literacy},
            {"occupations", d.occupations},
            {"sex", d.sex},
            {"marital_status", d.marital_status}};
}

// ---- commands -----------------------------------------------------------------

void cmd_generate_corpus(const Settings& s, std::ostream& out) {
    CorpusFixtureSpec spec;
    spec.seed = s.seed;
    const auto cases = generate_corpus(spec);
    write_file(s.out, serialize_cases(cases));
    out << "wrote " << cases.size() << " cases to " << s.out << "\n";
}

void cmd_ingest(const Settings& s, std::ostream& out) {
    const auto result = ingest_cases_file(s.input, {s.lenient, s.strict_sessions});
    const RedactionRules rules = s.denylist.empty() ? RedactionRules{} : RedactionRules::from_denylist_file(s.denylist);

    json diagnostics = json::array();
    for (const auto& d : result.diagnostics) {
        diagnostics.push_back({{"line", d.line}, {"case_id", d.case_id}, {"message", d.message}});
    }
    json incomplete = json::array();
    json redaction = json::array();
    std::size_t complete = 0;
    for (const auto& record : result.records) {
        const auto v = validate_case_completeness(record, &rules);
        if (v.complete) {
            ++complete;
        } else {
            json missing = json::array();
            for (auto link : v.missing_links) missing.push_back(std::string(to_string(link)));
            incomplete.push_back({{"case_id", v.case_id}, {"missing", missing}});
        }
        if (!v.redaction_findings.empty()) {
            redaction.push_back({{"case_id", v.case_id}, {"findings", v.redaction_findings}});
        }
    }
    const json report = {{"input", s.input},
                         {"records", result.records.size()},
                         {"diagnostics", diagnostics},
                         {"complete", complete},
                         {"incomplete", incomplete},
                         {"redaction", redaction},
                         {"demographics", demographics_json(demographic_stats(result.records))}};
    if (!s.out.empty()) write_file(s.out, serialize_cases(result.records));
    if (!s.report_path.empty()) write_file(s.report_path, report.dump(2) + "\n");

    if (s.format == "json") {
        emit_json(out, report);
        return;
    }
    out << "records: " << result.records.size() << "\n";
    out << "skipped: " << result.diagnostics.size() << "\n";
    for (const auto& d : result.diagnostics) out << "  line " << d.line << " " << d.case_id << ": " << d.message << "\n";
    out << "complete chains: " << complete << "/" << result.records.size() << "\n";
    for (const auto& i : incomplete) {
        out << "  " << i["case_id"].get<std::string>() << " missing:";
        for (const auto& m : i["missing"]) out << " " << m.get<std::string>();
        out << "\n";
    }
    out << "redaction findings: " << redaction.size() << " case(s)\n";
    for (const auto& r : redaction) {
        for (const auto& f : r["findings"]) out << "  " << r["case_id"].get<std::string>() << ": " << f.get<std::string>() << "\n";
    }
    if (!s.out.empty()) out << "wrote store to " << s.out << "\n";
}

void cmd_chunk(const Settings& s, std::ostream& out) {
    const EngineConfig config = load_settings_config(s);
    const auto cases = ingest_cases_file(s.input).records;
    const auto chunks = chunk_cases(cases, {config.retrieval.chunk_max_words, config.retrieval.chunk_stride_words});
    write_file(s.out, serialize_chunks(chunks));
    out << "wrote " << chunks.size() << " chunks from " << cases.size() << " cases to " << s.out << "\n";
}

void cmd_build_index(const Settings& s, std::ostream& out) {
    const EngineConfig config = load_settings_config(s);
    const auto chunks = parse_chunks(read_file(s.input));
    auto provider = make_embedding_provider(config);
    BuildOptions options;
    options.batch_size = config.embedding.batch_size;
    options.retry = config.limits.embedding_retry;
    BuildStats stats;
    const ChunkIndex index = build_index(chunks, *provider, options, &stats);
    save_index_file(index, s.out);
    out << "indexed " << index.size() << " chunks with " << index.provider << " in " << stats.batches
        << " batch(es) to " << s.out << "\n";
}

int cmd_graph_validate(const Settings& s, std::ostream& out) {
    const auto report = validate_graph(parse_graph_document(read_file(s.input)));
    if (s.format == "json") {
        json findings = json::array();
        for (const auto& f : report.findings) {
            findings.push_back({{"code", to_string(f.code)}, {"subject", f.subject}, {"message", f.message}});
        }
        emit_json(out, {{"ok", report.ok()}, {"findings", findings}});
    } else if (report.ok()) {
        out << "graph is valid\n";
    } else {
        for (const auto& f : report.findings) out << to_string(f.code) << " " << f.subject << ": " << f.message << "\n";
    }
    return report.ok() ? 0 : 1;
}

void cmd_graph_stats(const Settings& s, std::ostream& out) {
    const StatsReport stats = graph_stats(load_graph_file(s.input));
    if (s.format == "json") {
        emit_json(out, to_json(stats));
        return;
    }
    out << "nodes: " << stats.node_count << "\n";
    out << "edges: " << stats.edge_count << "\n";
    for (auto kind : kAllRelationKinds) {
        std::string name(to_string(kind));
        name.resize(std::max<std::size_t>(name.size(), 12), ' ');
        out << "  " << name << " " << stats.relation_count(kind) << "\n";
    }
    for (auto kind : kAllNodeKinds) {
        std::string name(to_string(kind));
        name.resize(std::max<std::size_t>(name.size(), 12), ' ');
        out << "  " << name << " " << stats.node_kind_count(kind) << "\n";
    }
}

void cmd_graph_fixture(const Settings& s, std::ostream& out) {
    const KnowledgeGraph graph = generate_reference_graph(s.seed);
    save_graph_file(graph, s.out);
    out << "wrote " << graph.node_count() << " nodes and " << graph.edge_count() << " edges to " << s.out << "\n";
}

void cmd_query(const Settings& s, std::ostream& out) {
    const EngineConfig config = load_settings_config(s);
    const auto mode = parse_grounding_mode(s.mode);
    if (!mode) throw Error(ErrorCode::InvalidArgument, "--mode must be rag or kg");
    Clock clock = s.frozen_clock.empty() ? system_clock() : fixed_clock(parse_utc(s.frozen_clock));
    Engine engine(config, make_embedding_provider(config), make_generation_client(config), std::move(clock));
    engine.load();

    QueryRequest request;
    request.query = s.text;
    request.mode = *mode;
    request.k = s.k;
    const QueryResponse response = engine.query(request);
    const json doc = to_json(response);
    if (!s.out.empty()) write_file(s.out, doc.dump(2) + "\n");
    if (s.format == "json") {
        emit_json(out, doc);
        return;
    }
    const auto& d = response.draft;
    out << d.text << "\n\n";
    out << "mode: " << to_string(d.mode) << "  model: " << d.params.model_id << "  template: " << d.template_id
        << (d.truncated ? "  (truncated)" : "") << "\n";
    for (const auto& id : d.cited_chunk_ids) out << "  cites chunk " << id << "\n";
    for (const auto& fp : d.cited_chain_fingerprints) out << "  cites chain " << fp << "\n";
    for (const auto& id : d.cited_intervention_ids) out << "  cites intervention " << id << "\n";
}

void cmd_eval_run(const Settings& s, std::ostream& out) {
    const EngineConfig config = load_settings_config(s);
    std::vector<ResponsePair> pairs;
    std::istringstream in(read_file(s.input));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            pairs.push_back({j.value("id", "pair-" + std::to_string(line_no)), j.at("candidate").get<std::string>(),
                             j.at("reference").get<std::string>()});
        } catch (const json::exception& e) {
            throw ParseError(std::string("expected {id, candidate, reference}: ") + e.what(), line_no);
        }
    }
    auto provider = make_embedding_provider(config);
    const EvalSummary summary = evaluate_pairs(pairs, *provider);
    if (s.format == "json") {
        json rows = json::array();
        for (const auto& p : summary.pairs) {
            rows.push_back({{"id", p.id},
                            {"precision", p.bert.precision},
                            {"recall", p.bert.recall},
                            {"f1", p.bert.f1},
                            {"sbert_cos", p.sbert_cos}});
        }
        emit_json(out, {{"provider", summary.provider},
                        {"pairs", rows},
                        {"bert_f1", summary.bert_f1},
                        {"sbert_cos", summary.sbert_cos}});
        return;
    }
    out << "provider: " << summary.provider << "\n";
    out << "pairs: " << summary.pairs.size() << "\n";
    out << "BERTScore F1: " << format_fixed(summary.bert_f1, 2) << "\n";
    out << "SBERT cosine: " << format_fixed(summary.sbert_cos, 2) << "\n";
}

void cmd_eval_aggregate(const Settings& s, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::exists(s.input)) throw Error(ErrorCode::IoError, "ratings file not found: " + s.input);
    const RatingLog log(s.input);
    const auto result = aggregate_ratings(log.current(), {s.skip_incomplete});
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    const auto comparisons = compare_human(result.rows);
    if (s.format == "json") {
        json human = json::array();
        for (const auto& h : result.rows) human.push_back(to_json(h));
        json comps = json::array();
        for (const auto& c : comparisons) comps.push_back(to_json(c));
        emit_json(out, {{"human", human}, {"comparisons", comps}, {"warnings", result.warnings}});
        return;
    }
    for (const auto& h : result.rows) {
        out << h.model_id << " " << to_string(h.mode) << ":";
        for (auto c : kAllCategories) out << " " << to_string(c) << "=" << format_fixed(h.category(c), 1);
        out << " overall=" << format_fixed(h.overall(), 1) << "\n";
    }
    for (const auto& c : comparisons) {
        out << c.model_id << " human " << format_fixed(c.rag_value, 1) << " -> " << format_fixed(c.kg_value, 1)
            << " (" << format_hundredths(c.delta_hundredths, true) << (c.improved ? ", improved" : "") << ")\n";
    }
}

void cmd_report(const Settings& s, std::ostream& out) {
    json doc;
    try {
        doc = json::parse(read_file(s.scores));
    } catch (const json::parse_error& e) {
        throw ParseError(s.scores + ": " + e.what());
    }
    auto rows = [&](const char* key) {
        std::vector<ScoreRow> list;
        if (doc.contains(key)) {
            for (const auto& j : doc.at(key)) list.push_back(score_row_from_json(j));
        }
        return list;
    };
    ReportInputs inputs;
    inputs.all_rows = rows("models");
    inputs.rag_rows = rows("rag");
    inputs.kg_rows = rows("kg");
    inputs.provider = doc.value("provider", std::string());
    inputs.template_version = doc.value("template_version", std::string());
    if (!s.ratings.empty()) {
        inputs.human = aggregate_ratings(RatingLog(s.ratings).current(), {s.skip_incomplete}).rows;
    } else if (doc.contains("human")) {
        for (const auto& j : doc.at("human")) inputs.human.push_back(category_averages_from_json(j));
    }
    const Report report = render_report(inputs);
    write_report(report, s.out);
    out << report.tables;
    out << "\nwrote results.json, tables.txt and plot data to " << s.out << "\n";
}

void cmd_serve(const Settings& s, std::ostream& out) {
    const EngineConfig config = load_settings_config(s);
    Engine engine(config, make_embedding_provider(config), make_generation_client(config));
    engine.load();
    Service service(engine);
    const int port = service.bind(config.server.host, config.server.port);
    out << "listening on http://" << config.server.host << ":" << port << "\n" << std::flush;
    service.listen();
}

void cmd_config_show(const Settings& s, std::ostream& out) {
    out << config_to_json(load_settings_config(s)).dump(2) << "\n";
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge-graph grounded drafting and evaluation for para-counselor support"};
    app.name(args.empty() ? "kgcounsel" : args.front());
    app.set_version_flag("--version", "kgcounsel 0.1.0");
    app.require_subcommand(1);

    Settings s;
    std::function<int()> action;
    app.add_option("--config", s.config_path, "Engine config file (JSON)")->check(CLI::ExistingFile);
    auto format_opt = [&](CLI::App* cmd) {
        cmd->add_option("--format", s.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    };
    auto simple = [&](std::function<void()> f) {
        return [&action, f] {
            action = [f] {
                f();
                return 0;
            };
        };
    };

    auto* gen_corpus = app.add_subcommand("generate-corpus", "Write the synthetic case corpus as JSON Lines");
    gen_corpus->add_option("--out", s.out, "Output file")->required();
    gen_corpus->add_option("--seed", s.seed, "Generator seed")->default_val(69);
    gen_corpus->callback(simple([&] { cmd_generate_corpus(s, out); }));

    auto* ingest = app.add_subcommand("ingest", "Validate a case corpus and lint it for completeness and redaction");
    ingest->add_option("cases", s.input, "Cases (JSON Lines)")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", s.out, "Write the validated store here");
    ingest->add_option("--report", s.report_path, "Write the lint report (JSON) here");
    ingest->add_option("--denylist", s.denylist, "Identifier denylist, one token per line")->check(CLI::ExistingFile);
    ingest->add_flag("--lenient", s.lenient, "Skip invalid records instead of failing");
    ingest->add_flag("--strict-sessions", s.strict_sessions, "Require 2 to 6 sessions per case");
    format_opt(ingest);
    ingest->callback(simple([&] { cmd_ingest(s, out); }));

    auto* chunk = app.add_subcommand("chunk", "Split session narratives into overlapping word windows");
    chunk->add_option("cases", s.input, "Cases (JSON Lines)")->required()->check(CLI::ExistingFile);
    chunk->add_option("--out", s.out, "Chunks output (JSON Lines)")->required();
    chunk->add_option("--max-words", s.max_words, "Words per chunk (default 500)");
    chunk->add_option("--stride", s.stride, "Words between chunk starts (default 250)");
    chunk->callback(simple([&] { cmd_chunk(s, out); }));

    auto* build = app.add_subcommand("build-index", "Embed chunks into a flat vector index");
    build->add_option("chunks", s.input, "Chunks (JSON Lines)")->required()->check(CLI::ExistingFile);
    build->add_option("--out", s.out, "Index output (JSON)")->required();
    build->callback(simple([&] { cmd_build_index(s, out); }));

    auto* graph = app.add_subcommand("graph", "Knowledge-graph tools");
    graph->require_subcommand(1);
    auto* validate = graph->add_subcommand("validate", "Check a graph file against the relation rules");
    validate->add_option("graph", s.input, "Graph (JSON)")->required()->check(CLI::ExistingFile);
    format_opt(validate);
    validate->callback([&] { action = [&] { return cmd_graph_validate(s, out); }; });
    auto* stats = graph->add_subcommand("stats", "Node and relation counts");
    stats->add_option("graph", s.input, "Graph (JSON)")->required()->check(CLI::ExistingFile);
    format_opt(stats);
    stats->callback(simple([&] { cmd_graph_stats(s, out); }));
    auto* fixture = graph->add_subcommand("generate-fixture", "Write the synthetic reference graph");
    fixture->add_option("--out", s.out, "Graph output (JSON)")->required();
    fixture->add_option("--seed", s.seed, "Generator seed")->default_val(2025);
    fixture->callback(simple([&] { cmd_graph_fixture(s, out); }));

    auto* query = app.add_subcommand("query", "Draft a grounded response to a counselor query");
    query->add_option("text", s.text, "Query text")->required();
    query->add_option("--mode", s.mode, "Grounding mode")->check(CLI::IsMember({"rag", "kg"}))->default_val("rag");
    query->add_option("--graph", s.graph, "Graph file (overrides config)");
    query->add_option("--index", s.index, "Index file (overrides config)");
    query->add_option("--k", s.k, "Snippets to retrieve (at most the configured k)");
    query->add_option("--out", s.out, "Also write the JSON response here");
    query->add_option("--frozen-clock", s.frozen_clock, "Fixed UTC timestamp for reproducible output");
    query->add_flag("--two-stage", s.two_stage, "KG mode: structure the evidence before drafting");
    query->add_flag("--include-snippets", s.include_snippets, "KG mode: add retrieved snippets to the context");
    format_opt(query);
    query->callback(simple([&] { cmd_query(s, out); }));

    auto* eval = app.add_subcommand("eval", "Automated metrics and human-rating aggregation");
    eval->require_subcommand(1);
    auto* eval_run = eval->add_subcommand("run", "BERTScore and sentence cosine over response pairs");
    eval_run->add_option("pairs", s.input, "Pairs (JSON Lines of {id, candidate, reference})")
        ->required()
        ->check(CLI::ExistingFile);
    format_opt(eval_run);
    eval_run->callback(simple([&] { cmd_eval_run(s, out); }));
    auto* eval_agg = eval->add_subcommand("aggregate", "Average human ratings per model, mode and category");
    eval_agg->add_option("ratings", s.input, "Ratings (JSON Lines)")->required();
    eval_agg->add_flag("--skip-incomplete", s.skip_incomplete, "Skip groups with missing categories");
    format_opt(eval_agg);
    eval_agg->callback(simple([&] { cmd_eval_aggregate(s, out, err); }));

    auto* report = app.add_subcommand("report", "Render comparison tables and plot data");
    report->add_option("--scores", s.scores, "Scores file {models, rag, kg, human}")->required()->check(CLI::ExistingFile);
    report->add_option("--ratings", s.ratings, "Ratings (JSON Lines); replaces the scores file's human block");
    report->add_option("--out", s.out, "Output directory")->required();
    report->add_flag("--skip-incomplete", s.skip_incomplete, "Skip rating groups with missing categories");
    report->callback(simple([&] { cmd_report(s, out); }));

    auto* serve = app.add_subcommand("serve", "Run the HTTP JSON API");
    serve->add_option("--graph", s.graph, "Graph file (overrides config)");
    serve->add_option("--index", s.index, "Index file (overrides config)");
    serve->add_option("--ratings", s.ratings, "Ratings log (overrides config)");
    serve->add_option("--host", s.host, "Listen address");
    serve->add_option("--port", s.port, "Listen port");
    serve->callback(simple([&] { cmd_serve(s, out); }));

    auto* config = app.add_subcommand("config", "Configuration tools");
    config->require_subcommand(1);
    auto* show = config->add_subcommand("show", "Print the effective configuration");
    show->callback(simple([&] { cmd_config_show(s, out); }));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cli_run(int argc, char** argv) {
    return cli_run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace kgcounsel
