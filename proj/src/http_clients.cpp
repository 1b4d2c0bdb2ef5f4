#include "kgcounsel/http_clients.hpp"

#include <regex>

#include "httplib.h"
#include "json.hpp"
#include "kgcounsel/text.hpp"

namespace kgcounsel {

using nlohmann::json;

Endpoint Endpoint::parse(const std::string& url) {
    static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, pattern)) {
        throw Error(ErrorCode::ConfigError, "endpoint must look like http://host:port/path, got '" + url + "'");
    }
    Endpoint e{m[1].str(), m[2].matched ? m[2].str() : "/"};
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (e.scheme_host_port.rfind("https://", 0) == 0) {
        throw Error(ErrorCode::ConfigError, "this build has no TLS support; use an http:// endpoint or a local proxy");
    }
#endif
    return e;
}

namespace {

struct Reply {
    int status = 0;
    std::string body;
};

// One POST with the given deadline. Status 0 means the transport failed.
Reply post_json(const Endpoint& endpoint, const std::string& api_key, const json& payload,
                std::chrono::milliseconds timeout, bool* timed_out, std::string* transport_error) {
    httplib::Client client(endpoint.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(endpoint.path, headers, payload.dump(), "application/json");
    if (!res) {
        *timed_out = std::chrono::steady_clock::now() - started >= timeout ||
                     res.error() == httplib::Error::ConnectionTimeout;
        *transport_error = httplib::to_string(res.error());
        return {};
    }
    return {res->status, res->body};
}

}  // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url, std::string model, std::size_t dim,
                                             std::string api_key, std::chrono::milliseconds timeout)
    : endpoint_(Endpoint::parse(url)), model_(std::move(model)), dim_(dim), api_key_(std::move(api_key)),
      timeout_(timeout) {
    if (dim_ == 0) throw Error(ErrorCode::ConfigError, "embedding dimension must be >= 1");
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_texts(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    bool timed_out = false;
    std::string transport;
    const Reply reply = post_json(endpoint_, api_key_, {{"model", model_}, {"input", texts}}, timeout_, &timed_out,
                                  &transport);
    if (reply.status == 0) {
        throw ProviderError("embedding request failed: " + transport + (timed_out ? " (timeout)" : ""), 0, true);
    }
    if (reply.status != 200) {
        throw ProviderError("embedding endpoint returned HTTP " + std::to_string(reply.status), reply.status,
                            reply.status >= 500 || reply.status == 429);
    }
    try {
        const json doc = json::parse(reply.body);
        std::vector<EmbeddingVector> out;
        for (const auto& item : doc.at("data")) {
            const auto values = item.at("embedding").get<std::vector<double>>();
            EmbeddingVector v(static_cast<Eigen::Index>(values.size()));
            for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
            out.push_back(std::move(v));
        }
        return out;
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed embedding response: ") + e.what(), reply.status, false);
    }
}

TokenEmbeddingMatrix HttpEmbeddingProvider::embed_tokens(std::string_view text) {
    const auto tokens = normalized_tokens(text);
    const auto vectors = embed_texts(tokens);
    if (vectors.size() != tokens.size()) {
        throw ProviderError("embedding endpoint returned " + std::to_string(vectors.size()) + " vectors for " +
                                std::to_string(tokens.size()) + " tokens",
                            0, false);
    }
    TokenEmbeddingMatrix m(static_cast<Eigen::Index>(tokens.size()), static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (static_cast<std::size_t>(vectors[i].size()) != dim_) {
            throw Error(ErrorCode::DimDrift, "embedding endpoint returned dimension " +
                                                 std::to_string(vectors[i].size()) + ", expected " +
                                                 std::to_string(dim_));
        }
        m.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
    }
    return m;
}

HttpGenerationClient::HttpGenerationClient(std::string url, std::string family, std::string api_key)
    : endpoint_(Endpoint::parse(url)), family_(std::move(family)), api_key_(std::move(api_key)) {}

GenerationResult HttpGenerationClient::generate(const PromptBundle& prompt, const GenerationParams& params,
                                                std::chrono::milliseconds timeout) {
    const json payload = {{"model", params.model_id},
                          {"messages",
                           {{{"role", "system"}, {"content", prompt.system}},
                            {{"role", "user"}, {"content", prompt.user}}}},
                          {"temperature", params.temperature},
                          {"max_tokens", params.max_output_tokens}};
    bool timed_out = false;
    std::string transport;
    const Reply reply = post_json(endpoint_, api_key_, payload, timeout, &timed_out, &transport);
    if (reply.status == 0) {
        if (timed_out) throw TimeoutError("generation request exceeded " + std::to_string(timeout.count()) + " ms");
        throw ClientError("generation request failed: " + transport, 0);
    }
    if (reply.status != 200) {
        throw ClientError("generation endpoint returned HTTP " + std::to_string(reply.status), reply.status);
    }
    try {
        const json doc = json::parse(reply.body);
        GenerationResult result;
        result.text = doc.at("text").get<std::string>();
        if (doc.contains("usage")) {
            const auto& usage = doc.at("usage");
            result.prompt_tokens = usage.value("prompt_tokens", std::size_t{0});
            result.output_tokens = usage.value("output_tokens", usage.value("completion_tokens", std::size_t{0}));
            result.finish_reason = usage.value("finish_reason", doc.value("finish_reason", std::string("stop")));
        }
        if (result.finish_reason == "stop" && result.output_tokens >= params.max_output_tokens) {
            result.finish_reason = "length";
        }
        return result;
    } catch (const json::exception& e) {
        throw ClientError(std::string("malformed generation response: ") + e.what(), reply.status);
    }
}

}  // namespace kgcounsel
