#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"
#include "kgcounsel/config.hpp"
#include "kgcounsel/eval.hpp"
#include "kgcounsel/generation.hpp"
#include "kgcounsel/kg_store.hpp"
#include "kgcounsel/retrieval.hpp"

namespace kgcounsel {

// Immutable artifacts shared by concurrent requests.
struct EngineSnapshot {
    std::optional<KnowledgeGraph> graph;
    std::optional<ChunkIndex> index;
};

struct QueryRequest {
    std::string query;
    GroundingMode mode = GroundingMode::RagOnly;
    std::optional<std::size_t> k;
    std::optional<KgRetrievalConfig> kg;
    std::optional<bool> include_snippets;  // KG mode only
    std::optional<bool> two_stage;
};

struct QueryResponse {
    DraftResponse draft;
    GroundingContext context;
};

nlohmann::json to_json(const QueryResponse& response);
nlohmann::json to_json(const StatsReport& stats);  // {nodes, edges, relations{}, node_kinds{}}

// Builds the configured providers, reading API keys from the environment.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EngineConfig& config);
std::unique_ptr<GenerationClient> make_generation_client(const EngineConfig& config);

class Engine {
public:
    Engine(EngineConfig config, std::unique_ptr<EmbeddingProvider> embedder,
           std::unique_ptr<GenerationClient> generator, Clock clock = system_clock());

    // Loads graph and index from the configured paths. A configured path that
    // cannot be read raises ConfigError naming it; an empty path leaves the
    // artifact absent.
    void load();
    // Builds a fresh snapshot and swaps it in; readers keep the old one until done.
    void reload() { load(); }
    void set_snapshot(EngineSnapshot snapshot);
    std::shared_ptr<const EngineSnapshot> snapshot() const;

    const EngineConfig& config() const { return config_; }
    EmbeddingProvider& embedder() { return *embedder_; }
    GenerationClient& generator() { return *generator_; }

    // Throws InvalidArgument (oversized), EmptyQuery, EmptyIndex / ConfigError
    // when the mode's artifact is absent, ClientError, TimeoutError.
    QueryResponse query(const QueryRequest& request);

    GroundingContext assemble(const QueryRequest& request, const EngineSnapshot& snapshot);

    RatingLog& ratings() { return *ratings_; }

    nlohmann::json health() const;

private:
    EngineConfig config_;
    std::unique_ptr<EmbeddingProvider> embedder_;
    std::unique_ptr<GenerationClient> generator_;
    Clock clock_;
    std::unique_ptr<RatingLog> ratings_;
    std::unique_ptr<DraftLog> draft_log_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const EngineSnapshot> snapshot_;
};

}  // namespace kgcounsel
