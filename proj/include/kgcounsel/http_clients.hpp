#pragma once

#include <chrono>
#include <string>

#include "kgcounsel/embedding.hpp"
#include "kgcounsel/generation.hpp"

namespace kgcounsel {

// "http://host:port/base" split into what the HTTP client needs.
struct Endpoint {
    std::string scheme_host_port;  // "http://host:port"
    std::string path;              // "/v1/embeddings"

    static Endpoint parse(const std::string& url);  // throws ConfigError
};

// POST {model, input: [texts]} -> {data: [{embedding: [...]}, ...]}.
// Token matrices embed each normalized token as its own input, one row per
// token. 5xx and transport failures are retryable ProviderErrors.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string url, std::string model, std::size_t dim, std::string api_key,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds{60000});

    std::string name() const override { return "http:" + model_; }
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) override;
    TokenEmbeddingMatrix embed_tokens(std::string_view text) override;

private:
    Endpoint endpoint_;
    std::string model_;
    std::size_t dim_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

// POST {model, messages: [{role, content}...], temperature, max_tokens}
// -> {text, usage: {prompt_tokens, output_tokens, finish_reason}}.
class HttpGenerationClient : public GenerationClient {
public:
    HttpGenerationClient(std::string url, std::string family, std::string api_key);

    std::string family() const override { return family_; }
    GenerationResult generate(const PromptBundle& prompt, const GenerationParams& params,
                              std::chrono::milliseconds timeout) override;

private:
    Endpoint endpoint_;
    std::string family_;
    std::string api_key_;
};

}  // namespace kgcounsel
