#include "kgcounsel/engine.hpp"

#include <algorithm>

#include "kgcounsel/http_clients.hpp"
#include "kgcounsel/text.hpp"

namespace kgcounsel {

using nlohmann::json;

json to_json(const QueryResponse& response) {
    return {{"draft", to_json(response.draft)}, {"context", to_json(response.context)}};
}

json to_json(const StatsReport& stats) {
    json relations = json::object();
    for (auto kind : kAllRelationKinds) relations[std::string(to_string(kind))] = stats.relation_count(kind);
    json kinds = json::object();
    for (auto kind : kAllNodeKinds) kinds[std::string(to_string(kind))] = stats.node_kind_count(kind);
    return {{"nodes", stats.node_count}, {"edges", stats.edge_count}, {"relations", relations}, {"node_kinds", kinds}};
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EngineConfig& config) {
    const auto& e = config.embedding;
    if (e.provider == "hash") return std::make_unique<HashEmbeddingProvider>(e.dim, e.seed);
    return std::make_unique<HttpEmbeddingProvider>(e.endpoint, e.model, e.dim, env_or_empty(e.api_key_env),
                                                   std::chrono::milliseconds(config.limits.request_timeout_ms));
}

std::unique_ptr<GenerationClient> make_generation_client(const EngineConfig& config) {
    const auto& g = config.generation;
    if (g.provider == "mock") return std::make_unique<MockGenerationClient>();
    return std::make_unique<HttpGenerationClient>(g.endpoint, g.family, env_or_empty(g.api_key_env));
}

Engine::Engine(EngineConfig config, std::unique_ptr<EmbeddingProvider> embedder,
               std::unique_ptr<GenerationClient> generator, Clock clock)
    : config_(std::move(config)), embedder_(std::move(embedder)), generator_(std::move(generator)),
      clock_(std::move(clock)), snapshot_(std::make_shared<EngineSnapshot>()) {
    config_.validate();
    ratings_ = config_.paths.ratings.empty() ? std::make_unique<RatingLog>()
                                             : std::make_unique<RatingLog>(config_.paths.ratings);
    if (!config_.paths.draft_log.empty()) draft_log_ = std::make_unique<DraftLog>(config_.paths.draft_log);
}

void Engine::load() {
    namespace fs = std::filesystem;
    EngineSnapshot next;
    if (!config_.paths.graph.empty()) {
        if (!fs::exists(config_.paths.graph)) {
            throw Error(ErrorCode::ConfigError, "graph file not found: " + config_.paths.graph);
        }
        next.graph = load_graph_file(config_.paths.graph);
    }
    if (!config_.paths.index.empty()) {
        if (!fs::exists(config_.paths.index)) {
            throw Error(ErrorCode::ConfigError, "index file not found: " + config_.paths.index);
        }
        next.index = load_index_file(config_.paths.index);
        if (next.index->provider != embedder_->name()) {
            throw Error(ErrorCode::ConfigError, "index " + config_.paths.index + " was built with provider " +
                                                    next.index->provider + ", but the configured provider is " +
                                                    embedder_->name());
        }
    }
    set_snapshot(std::move(next));
}

void Engine::set_snapshot(EngineSnapshot snapshot) {
    auto next = std::make_shared<const EngineSnapshot>(std::move(snapshot));
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(next);
}

std::shared_ptr<const EngineSnapshot> Engine::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

GroundingContext Engine::assemble(const QueryRequest& request, const EngineSnapshot& snap) {
    if (request.query.size() > config_.limits.max_query_chars) {
        throw Error(ErrorCode::InvalidArgument, "query is " + std::to_string(request.query.size()) +
                                                    " characters; the limit is " +
                                                    std::to_string(config_.limits.max_query_chars));
    }
    if (normalized_tokens(request.query).empty()) throw Error(ErrorCode::EmptyQuery, "query has no words");

    // Per-request overrides may tighten the configured limits, never loosen them.
    SearchOptions search_options{std::min(request.k.value_or(config_.retrieval.k), config_.retrieval.k),
                                 config_.retrieval.dense_weight};
    KgRetrievalConfig kg = config_.kg;
    if (request.kg) {
        kg.max_interventions = std::min(kg.max_interventions, request.kg->max_interventions);
        kg.max_chains = std::min(kg.max_chains, request.kg->max_chains);
        kg.max_general = std::min(kg.max_general, request.kg->max_general);
        kg.max_chain_length = std::min(kg.max_chain_length, request.kg->max_chain_length);
        kg.poverty_seeds_only = request.kg->poverty_seeds_only;
    }
    auto rag = [&] {
        if (!snap.index) throw Error(ErrorCode::EmptyIndex, "no chunk index is loaded");
        return assemble_rag_context(request.query, *snap.index, *embedder_, search_options);
    };

    GroundingContext context;
    if (request.mode == GroundingMode::RagOnly) {
        context = rag();
    } else {
        if (!snap.graph) throw Error(ErrorCode::ConfigError, "no knowledge graph is loaded");
        context = assemble_kg_context(request.query, *snap.graph, kg);
        if (request.include_snippets.value_or(config_.generation.kg_include_snippets)) {
            context.snippets = rag().snippets;
        }
    }
    check_context_limits(context, {search_options.k, kg.max_interventions, kg.max_chains, kg.max_general});
    return context;
}

QueryResponse Engine::query(const QueryRequest& request) {
    const auto snap = snapshot();
    QueryResponse response;
    response.context = assemble(request, *snap);

    const auto& g = config_.generation;
    DraftOptions options;
    options.retry = config_.limits.generation_retry;
    options.timeout = std::chrono::milliseconds(config_.limits.request_timeout_ms);
    options.clock = clock_;
    const bool two_stage = request.two_stage.value_or(g.two_stage) && request.mode == GroundingMode::KgGrounded;
    if (two_stage) {
        GenerationParams structure = g.params;
        if (!g.structure_model.empty()) structure.model_id = g.structure_model;
        response.draft = generate_two_stage_draft(*generator_, response.context, request.query, structure,
                                                  g.params, options, g.structure_template, g.kg_template);
    } else {
        const std::string& tpl = request.mode == GroundingMode::RagOnly ? g.rag_template : g.kg_template;
        response.draft = generate_draft(*generator_, render_prompt(response.context, request.query, tpl),
                                        g.params, options);
    }
    if (draft_log_) draft_log_->append(response.draft, request.query);
    return response;
}

json Engine::health() const {
    const auto snap = snapshot();
    const bool graph = snap->graph.has_value();
    const bool index = snap->index.has_value();
    return {{"status", graph || index ? "ok" : "degraded"},
            {"graph", graph ? "ok" : "absent"},
            {"index", index ? "ok" : "absent"},
            {"providers", "configured"},
            {"embedding", embedder_->name()},
            {"generation", generator_->family()}};
}

}  // namespace kgcounsel
