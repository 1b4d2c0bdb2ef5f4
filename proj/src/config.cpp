#include "kgcounsel/config.hpp"

#include <cstdlib>
#include <set>

#include "kgcounsel/io.hpp"

namespace kgcounsel {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

Error config_error(const std::string& message) { return Error(ErrorCode::ConfigError, message); }

bool looks_secret(const std::string& key) {
    for (const char* word : {"key", "secret", "password", "bearer"}) {
        if (key.find(word) != std::string::npos && key.find("_env") == std::string::npos) return true;
    }
    return false;
}

// Reads known keys from one JSON object and complains about the rest.
class Section {
public:
    Section(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw config_error(where_ + " must be a JSON object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw config_error(path(key) + " has the wrong type");
        }
    }

    void read_ms(const char* key, std::chrono::milliseconds& out) {
        long long ms = out.count();
        read(key, ms);
        out = std::chrono::milliseconds(ms);
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : obj_.items()) {
            if (seen_.count(key)) continue;
            if (looks_secret(key)) {
                throw config_error(path(key) + ": secrets are read from environment variables, never from config");
            }
            throw config_error("unknown config key '" + path(key) + "'");
        }
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

void read_retry(Section& parent, const char* key, RetryPolicy& retry) {
    if (const json* j = parent.child(key)) {
        Section s(*j, parent.path(key));
        s.read("max_attempts", retry.max_attempts);
        s.read_ms("initial_backoff_ms", retry.initial_backoff);
        s.read("multiplier", retry.multiplier);
        s.finish();
    }
}

ordered_json retry_json(const RetryPolicy& r) {
    return {{"max_attempts", r.max_attempts},
            {"initial_backoff_ms", r.initial_backoff.count()},
            {"multiplier", r.multiplier}};
}

}  // namespace

void EngineConfig::validate() const {
    auto require = [](bool ok, const std::string& message) {
        if (!ok) throw config_error(message);
    };
    require(embedding.provider == "hash" || embedding.provider == "http",
            "embedding.provider must be \"hash\" or \"http\"");
    require(embedding.provider != "http" || !embedding.endpoint.empty(), "embedding.endpoint is required for http");
    require(embedding.dim >= 1, "embedding.dim must be >= 1");
    require(embedding.batch_size >= 1, "embedding.batch_size must be >= 1");
    require(generation.provider == "mock" || generation.provider == "http",
            "generation.provider must be \"mock\" or \"http\"");
    require(generation.provider != "http" || !generation.endpoint.empty(),
            "generation.endpoint is required for http");
    require(generation.max_in_flight >= 1, "generation.max_in_flight must be >= 1");
    try {
        generation.params.validate();
        kg.validate();
        SearchOptions{retrieval.k, retrieval.dense_weight}.validate();
        limits.embedding_retry.validate();
        limits.generation_retry.validate();
    } catch (const Error& e) {
        throw config_error(e.what());
    }
    require(retrieval.chunk_max_words >= 1, "retrieval.chunk_max_words must be >= 1");
    require(retrieval.chunk_stride_words >= 1 && retrieval.chunk_stride_words <= retrieval.chunk_max_words,
            "retrieval.chunk_stride_words must lie in [1, chunk_max_words]");
    require(limits.max_query_chars >= 1, "limits.max_query_chars must be >= 1");
    require(limits.request_timeout_ms >= 1, "limits.request_timeout_ms must be >= 1");
    require(server.port >= 0 && server.port <= 65535, "server.port must lie in [0, 65535]");
}

ordered_json config_to_json(const EngineConfig& c) {
    ordered_json doc;
    doc["paths"] = {{"corpus", c.paths.corpus},
                    {"graph", c.paths.graph},
                    {"index", c.paths.index},
                    {"ratings", c.paths.ratings},
                    {"draft_log", c.paths.draft_log}};
    doc["embedding"] = {{"provider", c.embedding.provider},   {"endpoint", c.embedding.endpoint},
                        {"model", c.embedding.model},         {"dim", c.embedding.dim},
                        {"seed", c.embedding.seed},           {"api_key_env", c.embedding.api_key_env},
                        {"batch_size", c.embedding.batch_size}};
    doc["generation"] = {{"provider", c.generation.provider},
                         {"endpoint", c.generation.endpoint},
                         {"family", c.generation.family},
                         {"model_id", c.generation.params.model_id},
                         {"temperature", c.generation.params.temperature},
                         {"max_output_tokens", c.generation.params.max_output_tokens},
                         {"api_key_env", c.generation.api_key_env},
                         {"rag_template", c.generation.rag_template},
                         {"kg_template", c.generation.kg_template},
                         {"structure_template", c.generation.structure_template},
                         {"two_stage", c.generation.two_stage},
                         {"structure_model", c.generation.structure_model},
                         {"kg_include_snippets", c.generation.kg_include_snippets},
                         {"max_in_flight", c.generation.max_in_flight}};
    doc["retrieval"] = {{"k", c.retrieval.k},
                        {"dense_weight", c.retrieval.dense_weight},
                        {"chunk_max_words", c.retrieval.chunk_max_words},
                        {"chunk_stride_words", c.retrieval.chunk_stride_words}};
    doc["kg"] = {{"max_interventions", c.kg.max_interventions},
                 {"max_chains", c.kg.max_chains},
                 {"max_general", c.kg.max_general},
                 {"max_chain_length", c.kg.max_chain_length},
                 {"poverty_seeds_only", c.kg.poverty_seeds_only}};
    doc["limits"] = {{"max_query_chars", c.limits.max_query_chars},
                     {"request_timeout_ms", c.limits.request_timeout_ms},
                     {"embedding_retry", retry_json(c.limits.embedding_retry)},
                     {"generation_retry", retry_json(c.limits.generation_retry)}};
    doc["server"] = {{"host", c.server.host}, {"port", c.server.port}};
    return doc;
}

EngineConfig config_from_json(const json& doc) {
    EngineConfig c;
    Section root(doc, "");
    if (const json* j = root.child("paths")) {
        Section s(*j, "paths");
        s.read("corpus", c.paths.corpus);
        s.read("graph", c.paths.graph);
        s.read("index", c.paths.index);
        s.read("ratings", c.paths.ratings);
        s.read("draft_log", c.paths.draft_log);
        s.finish();
    }
    if (const json* j = root.child("embedding")) {
        Section s(*j, "embedding");
        s.read("provider", c.embedding.provider);
        s.read("endpoint", c.embedding.endpoint);
        s.read("model", c.embedding.model);
        s.read("dim", c.embedding.dim);
        s.read("seed", c.embedding.seed);
        s.read("api_key_env", c.embedding.api_key_env);
        s.read("batch_size", c.embedding.batch_size);
        s.finish();
    }
    if (const json* j = root.child("generation")) {
        Section s(*j, "generation");
        s.read("provider", c.generation.provider);
        s.read("endpoint", c.generation.endpoint);
        s.read("family", c.generation.family);
        s.read("model_id", c.generation.params.model_id);
        s.read("temperature", c.generation.params.temperature);
        s.read("max_output_tokens", c.generation.params.max_output_tokens);
        s.read("api_key_env", c.generation.api_key_env);
        s.read("rag_template", c.generation.rag_template);
        s.read("kg_template", c.generation.kg_template);
        s.read("structure_template", c.generation.structure_template);
        s.read("two_stage", c.generation.two_stage);
        s.read("structure_model", c.generation.structure_model);
        s.read("kg_include_snippets", c.generation.kg_include_snippets);
        s.read("max_in_flight", c.generation.max_in_flight);
        s.finish();
    }
    if (const json* j = root.child("retrieval")) {
        Section s(*j, "retrieval");
        s.read("k", c.retrieval.k);
        s.read("dense_weight", c.retrieval.dense_weight);
        s.read("chunk_max_words", c.retrieval.chunk_max_words);
        s.read("chunk_stride_words", c.retrieval.chunk_stride_words);
        s.finish();
    }
    if (const json* j = root.child("kg")) {
        Section s(*j, "kg");
        s.read("max_interventions", c.kg.max_interventions);
        s.read("max_chains", c.kg.max_chains);
        s.read("max_general", c.kg.max_general);
        s.read("max_chain_length", c.kg.max_chain_length);
        s.read("poverty_seeds_only", c.kg.poverty_seeds_only);
        s.finish();
    }
    if (const json* j = root.child("limits")) {
        Section s(*j, "limits");
        s.read("max_query_chars", c.limits.max_query_chars);
        s.read("request_timeout_ms", c.limits.request_timeout_ms);
        read_retry(s, "embedding_retry", c.limits.embedding_retry);
        read_retry(s, "generation_retry", c.limits.generation_retry);
        s.finish();
    }
    if (const json* j = root.child("server")) {
        Section s(*j, "server");
        s.read("host", c.server.host);
        s.read("port", c.server.port);
        s.finish();
    }
    root.finish();
    c.validate();
    return c;
}

EngineConfig load_config_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw config_error(path.string() + ": invalid JSON: " + e.what());
    }
    return config_from_json(doc);
}

std::string env_or_empty(const std::string& name) {
    if (name.empty()) return {};
    const char* value = std::getenv(name.c_str());
    return value ? value : "";
}

}  // namespace kgcounsel
