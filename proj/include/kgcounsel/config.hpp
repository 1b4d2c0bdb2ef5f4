#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "kgcounsel/generation.hpp"
#include "kgcounsel/kg_query.hpp"
#include "kgcounsel/retry.hpp"

namespace kgcounsel {

// Everything the CLI and the service need. Defaults reproduce the published
// settings; secrets never live here, only the names of the environment
// variables that hold them.
struct EngineConfig {
    struct Paths {
        std::string corpus;
        std::string graph;
        std::string index;
        std::string ratings;    // JSON Lines; empty keeps ratings in memory
        std::string draft_log;  // JSON Lines; empty disables draft persistence
    } paths;

    struct Embedding {
        std::string provider = "hash";  // "hash" (offline) or "http"
        std::string endpoint;
        std::string model = "hash-bow";
        std::size_t dim = 64;
        std::uint64_t seed = 0x5eed;
        std::string api_key_env = "EMBEDDINGS_API_KEY";
        std::size_t batch_size = 32;
    } embedding;

    struct Generation {
        std::string provider = "mock";  // "mock" or "http"
        std::string endpoint;
        std::string family = "mock";
        GenerationParams params{};
        std::string api_key_env = "GENERATION_API_KEY";
        std::string rag_template = "rag_v1";
        std::string kg_template = "kg_v1";
        std::string structure_template = "kg_structure_v1";
        bool two_stage = false;
        std::string structure_model;  // stage-1 model; empty reuses params.model_id
        bool kg_include_snippets = false;
        std::size_t max_in_flight = 4;
    } generation;

    struct Retrieval {
        std::size_t k = 3;
        double dense_weight = 1.0;
        std::size_t chunk_max_words = 500;
        std::size_t chunk_stride_words = 250;
    } retrieval;

    KgRetrievalConfig kg{};

    struct Limits {
        std::size_t max_query_chars = 4000;
        long long request_timeout_ms = 60000;
        RetryPolicy embedding_retry{};
        RetryPolicy generation_retry{};
    } limits;

    struct Server {
        std::string host = "127.0.0.1";
        int port = 8080;
    } server;

    void validate() const;  // throws ConfigError
};

nlohmann::ordered_json config_to_json(const EngineConfig& config);

// Every key is optional; unknown keys and anything that looks like a secret
// are rejected with ConfigError.
EngineConfig config_from_json(const nlohmann::json& doc);
EngineConfig load_config_file(const std::filesystem::path& path);

// Reads an environment variable; empty when unset.
std::string env_or_empty(const std::string& name);

}  // namespace kgcounsel
