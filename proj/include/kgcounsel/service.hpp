#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "kgcounsel/engine.hpp"

namespace kgcounsel {

struct HttpReply {
    int status = 200;
    std::string body;  // JSON
};

// HTTP status for an engine error code.
int http_status(ErrorCode code);

// JSON API under /v1:
//   POST /v1/query            {query, mode: "rag"|"kg", k?, limits?, include_snippets?, two_stage?}
//   GET  /v1/graph/stats
//   POST /v1/graph/chains     {query, limits?}
//   POST /v1/ratings          [HumanRating...] or {ratings: [...]}
//   GET  /v1/reports/comparison
//   GET  /v1/health
//   POST /v1/reload
// Errors come back as {error: {code, message}}.
class Service {
public:
    explicit Service(Engine& engine);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Transport-free dispatch; the HTTP server routes every request through here.
    HttpReply handle(std::string_view method, std::string_view path, std::string_view body);

    // Binds and returns the port (pass 0 for an ephemeral one). Throws IoError.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void start();   // listen on a background thread
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace kgcounsel
