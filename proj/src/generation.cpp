#include "kgcounsel/generation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <exception>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "kgcounsel/io.hpp"
#include "kgcounsel/text.hpp"

namespace kgcounsel {

using nlohmann::json;

std::string_view to_string(GroundingMode mode) {
    return mode == GroundingMode::RagOnly ? "rag" : "kg";
}

std::optional<GroundingMode> parse_grounding_mode(std::string_view text) {
    if (text == "rag" || text == "RagOnly") return GroundingMode::RagOnly;
    if (text == "kg" || text == "KgGrounded") return GroundingMode::KgGrounded;
    return std::nullopt;
}

void GenerationParams::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "temperature must lie in [0, 2]");
    }
    if (max_output_tokens < 1) throw Error(ErrorCode::InvalidArgument, "max_output_tokens must be >= 1");
    if (model_id.empty()) throw Error(ErrorCode::InvalidArgument, "model_id must not be empty");
}

void check_context_limits(const GroundingContext& context, const ContextLimits& limits) {
    auto over = [](const char* what, std::size_t n, std::size_t cap) {
        if (n > cap) {
            throw Error(ErrorCode::InvariantError, std::string(what) + " count " + std::to_string(n) +
                                                       " exceeds limit " + std::to_string(cap));
        }
    };
    over("snippet", context.snippets.size(), limits.snippets);
    over("intervention", context.interventions.size(), limits.interventions);
    over("chain", context.chains.size(), limits.chains);
    over("general intervention", context.general.size(), limits.general);
    if (context.mode == GroundingMode::RagOnly &&
        !(context.interventions.empty() && context.chains.empty() && context.general.empty())) {
        throw Error(ErrorCode::InvariantError, "a RAG-only context cannot carry knowledge-graph evidence");
    }
}

GroundingContext assemble_rag_context(std::string_view query, const ChunkIndex& index,
                                      EmbeddingProvider& provider, const SearchOptions& search_options) {
    GroundingContext context;
    context.mode = GroundingMode::RagOnly;
    for (const auto& hit : search(index, query, provider, search_options)) {
        const IndexEntry* e = index.find(hit.chunk_id);
        context.snippets.push_back({e->chunk_id, e->case_id, e->session_index, e->text, hit.combined});
    }
    return context;
}

GroundingContext assemble_kg_context(std::string_view query, const KnowledgeGraph& graph,
                                     const KgRetrievalConfig& config) {
    config.validate();
    GroundingContext context;
    context.mode = GroundingMode::KgGrounded;
    context.matches = match_nodes(graph, query);
    context.interventions = find_interventions_for(graph, context.matches, config);
    context.chains = find_causal_chains(graph, context.matches, config);
    context.general = general_effective_interventions(graph, config);

    auto remember = [&](const std::string& id) {
        if (const KgNode* n = graph.find_node(id)) context.labels.emplace(id, n->label);
    };
    for (const auto& m : context.matches) remember(m.node_id);
    for (const auto* list : {&context.interventions, &context.general}) {
        for (const auto& s : *list) {
            remember(s.intervention_id);
            for (const auto& id : s.addressed_causes) remember(id);
            for (const auto& id : s.mitigated_effects) remember(id);
            for (const auto& id : s.companions) remember(id);
        }
    }
    for (const auto& c : context.chains) {
        for (const auto& id : c.node_ids) remember(id);
    }
    return context;
}

namespace {

const std::string& label_of(const std::map<std::string, std::string>& labels, const std::string& id) {
    auto it = labels.find(id);
    return it == labels.end() ? id : it->second;
}

std::string joined_labels(const std::vector<std::string>& ids, const std::map<std::string, std::string>& labels) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ", ";
        out += label_of(labels, id);
    }
    return out;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
        text.replace(pos, from.size(), to);
    }
    return text;
}

std::string intervention_line(const InterventionSuggestion& s, const std::map<std::string, std::string>& labels) {
    std::string line = label_of(labels, s.intervention_id);
    if (!s.addressed_causes.empty()) line += "; addresses: " + joined_labels(s.addressed_causes, labels);
    if (!s.mitigated_effects.empty()) line += "; mitigates: " + joined_labels(s.mitigated_effects, labels);
    if (!s.companions.empty()) line += "; pairs with: " + joined_labels(s.companions, labels);
    return line;
}

std::string snippet_display(const Snippet& s) {
    return s.case_id + ", session " + std::to_string(s.session_index);
}

// One walk shared by the block renderer and the citation table so the two can
// never disagree on marker numbering.
template <typename Visit>
void for_each_marker(const GroundingContext& context, Visit&& visit) {
    for (std::size_t i = 0; i < context.snippets.size(); ++i) {
        const auto& s = context.snippets[i];
        visit("[S" + std::to_string(i + 1) + "]", Citation{CitationKind::Snippet, s.chunk_id, snippet_display(s)});
    }
    for (std::size_t i = 0; i < context.interventions.size(); ++i) {
        const auto& s = context.interventions[i];
        visit("[I" + std::to_string(i + 1) + "]",
              Citation{CitationKind::Intervention, s.intervention_id, intervention_line(s, context.labels)});
    }
    for (std::size_t i = 0; i < context.chains.size(); ++i) {
        const auto& c = context.chains[i];
        visit("[C" + std::to_string(i + 1) + "]",
              Citation{CitationKind::Chain, c.fingerprint(), render_chain(c, context.labels)});
    }
    for (std::size_t i = 0; i < context.general.size(); ++i) {
        const auto& s = context.general[i];
        visit("[G" + std::to_string(i + 1) + "]",
              Citation{CitationKind::General, s.intervention_id, label_of(context.labels, s.intervention_id)});
    }
}

}  // namespace

std::string render_chain(const CausalChain& chain, const std::map<std::string, std::string>& labels) {
    std::string out;
    for (std::size_t i = 0; i < chain.node_ids.size(); ++i) {
        if (i > 0) out += std::string(" —") + std::string(to_string(chain.relation_kinds[i - 1])) + "→ ";
        out += label_of(labels, chain.node_ids[i]);
    }
    return out;
}

std::string render_context_block(const GroundingContext& context) {
    static constexpr const char* kTitles[] = {"Retrieved case excerpts", "Causal chains", "Targeted interventions",
                                              "Generally effective interventions"};
    // Indexed by CitationKind.
    std::string sections[4];
    std::size_t snippet = 0;
    for_each_marker(context, [&](const std::string& marker, const Citation& c) {
        const auto k = static_cast<std::size_t>(c.kind);
        if (c.kind == CitationKind::Snippet) {
            sections[k] += marker + " (" + c.display + ") " + context.snippets[snippet++].text + "\n";
        } else {
            sections[k] += marker + " " + c.display + "\n";
        }
    });
    std::string out;
    for (auto k : {CitationKind::Snippet, CitationKind::Intervention, CitationKind::Chain, CitationKind::General}) {
        const auto i = static_cast<std::size_t>(k);
        if (!sections[i].empty()) out += std::string(kTitles[i]) + ":\n" + sections[i] + "\n";
    }
    return out;
}

const Citation* PromptBundle::find_citation(std::string_view marker) const {
    for (const auto& [m, c] : citations) {
        if (m == marker) return &c;
    }
    return nullptr;
}

std::string PromptBundle::text() const { return system + "\n" + user; }

PromptBundle render_prompt(const GroundingContext& context, std::string_view query, std::string_view template_id,
                           const TemplateRegistry& registry) {
    const PromptTemplate& tpl = registry.get(template_id);
    PromptBundle bundle;
    bundle.template_id = std::string(template_id);
    bundle.mode = context.mode;
    bundle.system = tpl.system;
    // Query last so that placeholder-looking text inside it stays literal.
    std::string user = replace_all(tpl.user, "{{context}}", "\x01");
    user = replace_all(std::move(user), "{{query}}", "\x02");
    user = replace_all(std::move(user), "\x01", render_context_block(context));
    bundle.user = replace_all(std::move(user), "\x02", query);
    for_each_marker(context, [&](const std::string& marker, const Citation& c) {
        bundle.citations.emplace_back(marker, c);
    });
    return bundle;
}

// ---- templates --------------------------------------------------------------

void TemplateRegistry::add(std::string id, PromptTemplate tpl) { templates_[std::move(id)] = std::move(tpl); }

const PromptTemplate& TemplateRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw Error(ErrorCode::UnknownTemplate, "unknown template '" + std::string(id) + "'");
    return it->second;
}

bool TemplateRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

TemplateRegistry TemplateRegistry::load_directory(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "template directory not found: " + dir.string());
    TemplateRegistry registry;
    const std::string suffix = ".system.txt";
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        const std::string id = name.substr(0, name.size() - suffix.size());
        const fs::path user_path = dir / (id + ".user.txt");
        if (!fs::exists(user_path)) throw Error(ErrorCode::IoError, "template " + id + " has no user part");
        registry.add(id, {read_file(entry.path()), read_file(user_path)});
    }
    return registry;
}

// ---- mock client ------------------------------------------------------------

GenerationResult MockGenerationClient::generate(const PromptBundle& prompt, const GenerationParams& params,
                                                std::chrono::milliseconds timeout) {
    if (latency_ > timeout) {
        throw TimeoutError("mock generation exceeded " + std::to_string(timeout.count()) + " ms");
    }
    const std::string prompt_text = prompt.text();
    std::uint64_t digest = fnv1a64(prompt_text);
    digest = fnv1a64(params.model_id, digest);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f/%zu", params.temperature, params.max_output_tokens);
    digest = fnv1a64(buf, digest);

    std::ostringstream out;
    out << "Thank you for sharing this. Here is a supportive, non-diagnostic draft for the session.";
    // Round-robin over evidence kinds so each kind present gets cited.
    std::vector<std::vector<const std::pair<std::string, Citation>*>> by_kind(4);
    for (const auto& entry : prompt.citations) by_kind[static_cast<std::size_t>(entry.second.kind)].push_back(&entry);
    std::size_t cited = 0;
    for (std::size_t round = 0; cited < 4; ++round) {
        bool any = false;
        for (const auto& list : by_kind) {
            if (round >= list.size() || cited == 4) continue;
            any = true;
            const auto& [marker, c] = *list[round];
            switch (c.kind) {
                case CitationKind::Snippet: out << " A similar situation was handled before " << marker << "."; break;
                case CitationKind::Chain: out << " Consider the pathway " << c.display << " " << marker << "."; break;
                case CitationKind::Intervention:
                case CitationKind::General: out << " A practical step is " << c.display << " " << marker << "."; break;
            }
            ++cited;
        }
        if (!any) break;
    }
    out << " Encourage small daily goals and involve trusted family support where possible.";
    std::snprintf(buf, sizeof buf, " (draft %016llx)", static_cast<unsigned long long>(digest));
    out << buf;

    GenerationResult result;
    const auto spans = word_spans(out.str());
    result.text = out.str();
    result.prompt_tokens = word_count(prompt_text);
    if (spans.size() > params.max_output_tokens) {
        result.text = result.text.substr(0, spans[params.max_output_tokens - 1].end);
        result.output_tokens = params.max_output_tokens;
        result.finish_reason = "length";
    } else {
        result.output_tokens = spans.size();
    }
    return result;
}

// ---- drafts -----------------------------------------------------------------

Clock system_clock() {
    return [] { return std::chrono::system_clock::now(); };
}

Clock fixed_clock(std::chrono::system_clock::time_point at) {
    return [at] { return at; };
}

std::string format_utc_ms(std::chrono::system_clock::time_point t) {
    using namespace std::chrono;
    const auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count();
    const auto secs = static_cast<std::time_t>(ms >= 0 ? ms / 1000 : (ms - 999) / 1000);
    const int millis = static_cast<int>(ms - static_cast<long long>(secs) * 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[80];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
    return buf;
}

std::chrono::system_clock::time_point parse_utc(std::string_view text) {
    static const std::regex pattern(R"((\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(?:\.(\d{1,3}))?Z)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(text.begin(), text.end(), m, pattern)) {
        throw Error(ErrorCode::InvalidArgument, "expected a UTC timestamp like 2025-01-01T00:00:00Z, got '" +
                                                    std::string(text) + "'");
    }
    std::tm tm{};
    tm.tm_year = std::stoi(m[1].str()) - 1900;
    tm.tm_mon = std::stoi(m[2].str()) - 1;
    tm.tm_mday = std::stoi(m[3].str());
    tm.tm_hour = std::stoi(m[4].str());
    tm.tm_min = std::stoi(m[5].str());
    tm.tm_sec = std::stoi(m[6].str());
    int millis = 0;
    if (m[7].matched) {
        std::string frac = m[7].str();
        frac.resize(3, '0');
        millis = std::stoi(frac);
    }
    const std::time_t secs = timegm(&tm);
    return std::chrono::system_clock::time_point(std::chrono::seconds(secs)) + std::chrono::milliseconds(millis);
}

std::vector<std::string> extract_markers(std::string_view text) {
    static const std::regex pattern(R"(\[[SICG][1-9][0-9]*\])");
    std::vector<std::string> out;
    std::set<std::string> seen;
    using It = std::string_view::const_iterator;
    for (std::regex_iterator<It> it(text.begin(), text.end(), pattern), end; it != end; ++it) {
        std::string marker = it->str();
        if (seen.insert(marker).second) out.push_back(std::move(marker));
    }
    return out;
}

DraftResponse generate_draft(GenerationClient& client, const PromptBundle& prompt, const GenerationParams& params,
                             const DraftOptions& options) {
    params.validate();
    DraftResponse draft;
    draft.mode = prompt.mode;
    draft.params = params;
    draft.template_id = prompt.template_id;

    const auto started = options.clock();
    draft.created_at = format_utc_ms(started);
    GenerationResult result;
    try {
        result = with_retry(
            options.retry, [&] { return client.generate(prompt, params, options.timeout); },
            [](std::exception_ptr ep) {
                try {
                    std::rethrow_exception(ep);
                } catch (const ClientError& e) {
                    return e.retryable();
                } catch (const TimeoutError&) {
                    return true;
                } catch (...) {
                    return false;
                }
            },
            &draft.retries, options.sleep);
    } catch (const ClientError& e) {
        const int attempts = draft.retries + 1;
        throw ClientError(std::string(e.what()) + " (after " + std::to_string(attempts) + " attempt(s))", e.status(),
                          attempts);
    }
    const auto finished = options.clock();
    draft.model_latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(finished - started).count();

    draft.text = std::move(result.text);
    draft.truncated = result.finish_reason == "length";
    draft.prompt_tokens = result.prompt_tokens;
    draft.output_tokens = result.output_tokens;

    for (const auto& marker : extract_markers(draft.text)) {
        const Citation* c = prompt.find_citation(marker);
        if (!c) continue;  // the model invented a marker
        draft.cited_markers.push_back(marker);
        auto add_unique = [](std::vector<std::string>& list, const std::string& id) {
            if (std::find(list.begin(), list.end(), id) == list.end()) list.push_back(id);
        };
        switch (c->kind) {
            case CitationKind::Snippet: add_unique(draft.cited_chunk_ids, c->ref); break;
            case CitationKind::Chain: add_unique(draft.cited_chain_fingerprints, c->ref); break;
            case CitationKind::Intervention:
            case CitationKind::General: add_unique(draft.cited_intervention_ids, c->ref); break;
        }
    }
    return draft;
}

DraftResponse generate_two_stage_draft(GenerationClient& client, const GroundingContext& context,
                                       std::string_view query, const GenerationParams& structure_params,
                                       const GenerationParams& params, const DraftOptions& options,
                                       std::string_view structure_template, std::string_view draft_template,
                                       const TemplateRegistry& registry) {
    const PromptBundle stage1 = render_prompt(context, query, structure_template, registry);
    const DraftResponse structured = generate_draft(client, stage1, structure_params, options);

    PromptBundle stage2 = render_prompt(context, query, draft_template, registry);
    const std::string block = render_context_block(context);
    const std::string summary = "Structured evidence summary:\n" + structured.text + "\n\n";
    const std::size_t at = block.empty() ? std::string::npos : stage2.user.find(block);
    if (at == std::string::npos) {
        stage2.user = summary + stage2.user;
    } else {
        stage2.user.insert(at + block.size(), summary);
    }
    DraftResponse draft = generate_draft(client, stage2, params, options);
    draft.stages = 2;
    draft.retries += structured.retries;
    draft.model_latency_ms += structured.model_latency_ms;
    draft.created_at = structured.created_at;
    return draft;
}

std::vector<DraftResponse> generate_drafts(GenerationClient& client, const std::vector<PromptBundle>& prompts,
                                           const GenerationParams& params, const DraftOptions& options,
                                           std::size_t max_in_flight) {
    if (max_in_flight == 0) throw Error(ErrorCode::InvalidArgument, "max_in_flight must be >= 1");
    std::vector<DraftResponse> out(prompts.size());
    std::vector<std::exception_ptr> errors(prompts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < prompts.size(); i = next++) {
            try {
                out[i] = generate_draft(client, prompts[i], params, options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(max_in_flight, prompts.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    if (n_threads > 0) worker();
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

void DraftLog::append(const DraftResponse& draft, std::string_view query) {
    json line = to_json(draft);
    if (!query.empty()) line["query"] = std::string(query);
    const std::string text = line.dump() + "\n";
    std::lock_guard lock(mutex_);
    append_file(path_, text);
}

// ---- JSON -------------------------------------------------------------------

json to_json(const GenerationParams& params) {
    return {{"model_id", params.model_id},
            {"temperature", params.temperature},
            {"max_output_tokens", params.max_output_tokens}};
}

json to_json(const InterventionSuggestion& s, const std::map<std::string, std::string>& labels) {
    return {{"intervention_id", s.intervention_id},
            {"label", label_of(labels, s.intervention_id)},
            {"addressed_causes", s.addressed_causes},
            {"mitigated_effects", s.mitigated_effects},
            {"companions", s.companions},
            {"score", s.score}};
}

json to_json(const GroundingContext& context) {
    json doc;
    doc["mode"] = std::string(to_string(context.mode));
    json snippets = json::array();
    for (std::size_t i = 0; i < context.snippets.size(); ++i) {
        const auto& s = context.snippets[i];
        snippets.push_back({{"marker", "S" + std::to_string(i + 1)},
                            {"chunk_id", s.chunk_id},
                            {"case_id", s.case_id},
                            {"session_index", s.session_index},
                            {"score", s.score},
                            {"text", s.text}});
    }
    doc["snippets"] = std::move(snippets);
    json interventions = json::array();
    for (const auto& s : context.interventions) interventions.push_back(to_json(s, context.labels));
    doc["interventions"] = std::move(interventions);
    json chains = json::array();
    for (const auto& c : context.chains) {
        chains.push_back({{"fingerprint", c.fingerprint()},
                          {"node_ids", c.node_ids},
                          {"relevance", c.relevance},
                          {"text", render_chain(c, context.labels)}});
    }
    doc["chains"] = std::move(chains);
    json general = json::array();
    for (const auto& s : context.general) general.push_back(to_json(s, context.labels));
    doc["general"] = std::move(general);
    json matches = json::array();
    for (const auto& m : context.matches) matches.push_back({{"node_id", m.node_id}, {"score", m.match_score}});
    doc["matches"] = std::move(matches);
    return doc;
}

json to_json(const DraftResponse& draft) {
    return {{"text", draft.text},
            {"mode", std::string(to_string(draft.mode))},
            {"params", to_json(draft.params)},
            {"template_id", draft.template_id},
            {"cited_chunk_ids", draft.cited_chunk_ids},
            {"cited_chain_fingerprints", draft.cited_chain_fingerprints},
            {"cited_intervention_ids", draft.cited_intervention_ids},
            {"cited_markers", draft.cited_markers},
            {"created_at", draft.created_at},
            {"model_latency_ms", draft.model_latency_ms},
            {"truncated", draft.truncated},
            {"prompt_tokens", draft.prompt_tokens},
            {"output_tokens", draft.output_tokens},
            {"retries", draft.retries},
            {"stages", draft.stages}};
}

}  // namespace kgcounsel
