#include "kgcounsel/service.hpp"

#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "kgcounsel/kg_query.hpp"

namespace kgcounsel {

using nlohmann::json;

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::ValidationError:
        case ErrorCode::EmptyQuery:
        case ErrorCode::InvalidArgument:
        case ErrorCode::EmptyText:
        case ErrorCode::MissingCategory:
        case ErrorCode::UnmatchedModel:
        case ErrorCode::DuplicateId:
        case ErrorCode::EmptyLabel:
        case ErrorCode::MissingEndpoint:
        case ErrorCode::KindViolation:
        case ErrorCode::DuplicateEdge:
        case ErrorCode::UnknownTemplate: return 400;
        case ErrorCode::EmptyIndex:
        case ErrorCode::ConfigError: return 503;
        case ErrorCode::ProviderError:
        case ErrorCode::ClientError: return 502;
        case ErrorCode::Timeout: return 504;
        default: return 500;
    }
}

namespace {

HttpReply reply(int status, const json& body) { return {status, body.dump()}; }

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
    return reply(status, {{"error", {{"code", std::string(code)}, {"message", message}}}});
}

json parse_body(std::string_view body) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("request body is not valid JSON: ") + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ParseError("request body must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) throw ParseError("unknown field '" + key + "'");
    }
}

template <typename T>
T field(const json& obj, const char* key) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + key + "' is missing or has the wrong type");
    }
}

KgRetrievalConfig limits_from(const json& obj, KgRetrievalConfig base) {
    reject_unknown(obj, {"max_interventions", "max_chains", "max_general", "max_chain_length", "poverty_seeds_only"});
    if (obj.contains("max_interventions")) base.max_interventions = field<std::size_t>(obj, "max_interventions");
    if (obj.contains("max_chains")) base.max_chains = field<std::size_t>(obj, "max_chains");
    if (obj.contains("max_general")) base.max_general = field<std::size_t>(obj, "max_general");
    if (obj.contains("max_chain_length")) base.max_chain_length = field<std::size_t>(obj, "max_chain_length");
    if (obj.contains("poverty_seeds_only")) base.poverty_seeds_only = field<bool>(obj, "poverty_seeds_only");
    base.validate();
    return base;
}

}  // namespace

struct Service::Impl {
    Engine& engine;
    httplib::Server server;
    std::thread thread;

    explicit Impl(Engine& e) : engine(e) {}

    HttpReply query(std::string_view body) {
        const json req = parse_body(body);
        reject_unknown(req, {"query", "mode", "k", "limits", "include_snippets", "two_stage"});
        QueryRequest q;
        q.query = field<std::string>(req, "query");
        const auto mode = parse_grounding_mode(req.contains("mode") ? field<std::string>(req, "mode") : "rag");
        if (!mode) throw ParseError("mode must be \"rag\" or \"kg\"");
        q.mode = *mode;
        if (req.contains("k")) q.k = field<std::size_t>(req, "k");
        if (req.contains("limits")) q.kg = limits_from(req.at("limits"), engine.config().kg);
        if (req.contains("include_snippets")) q.include_snippets = field<bool>(req, "include_snippets");
        if (req.contains("two_stage")) q.two_stage = field<bool>(req, "two_stage");
        if (q.query.size() > engine.config().limits.max_query_chars) {
            return error_reply(413, "InvalidArgument",
                               "query exceeds " + std::to_string(engine.config().limits.max_query_chars) +
                                   " characters");
        }
        return reply(200, to_json(engine.query(q)));
    }

    HttpReply graph_stats() {
        const auto snap = engine.snapshot();
        if (!snap->graph) return error_reply(503, "ConfigError", "no knowledge graph is loaded");
        return reply(200, to_json(kgcounsel::graph_stats(*snap->graph)));
    }

    HttpReply graph_chains(std::string_view body) {
        const json req = parse_body(body);
        reject_unknown(req, {"query", "limits"});
        const auto snap = engine.snapshot();
        if (!snap->graph) return error_reply(503, "ConfigError", "no knowledge graph is loaded");
        const KgRetrievalConfig config =
            req.contains("limits") ? limits_from(req.at("limits"), engine.config().kg) : engine.config().kg;
        const auto& graph = *snap->graph;
        const auto matches = match_nodes(graph, field<std::string>(req, "query"));
        const auto chains = find_causal_chains(graph, matches, config);
        std::map<std::string, std::string> labels;
        for (const auto& c : chains) {
            for (const auto& id : c.node_ids) labels.emplace(id, graph.node(id).label);
        }
        json out_matches = json::array();
        for (const auto& m : matches) {
            out_matches.push_back(
                {{"node_id", m.node_id}, {"label", graph.node(m.node_id).label}, {"score", m.match_score}});
        }
        json out_chains = json::array();
        for (const auto& c : chains) {
            json kinds = json::array();
            for (auto k : c.relation_kinds) kinds.push_back(std::string(to_string(k)));
            out_chains.push_back({{"fingerprint", c.fingerprint()},
                                  {"node_ids", c.node_ids},
                                  {"relation_kinds", kinds},
                                  {"relevance", c.relevance},
                                  {"text", render_chain(c, labels)}});
        }
        return reply(200, {{"matches", out_matches}, {"chains", out_chains}});
    }

    HttpReply ratings(std::string_view body) {
        const json req = parse_body(body);
        const json* list = &req;
        if (req.is_object()) {
            reject_unknown(req, {"ratings"});
            list = &req.at("ratings");
        }
        if (!list->is_array()) throw ParseError("expected a list of ratings");
        std::vector<HumanRating> parsed;
        for (const auto& j : *list) parsed.push_back(rating_from_json(j));
        engine.ratings().submit(parsed);
        return reply(200, {{"accepted", parsed.size()}, {"stored", engine.ratings().size()}});
    }

    HttpReply comparison() {
        const auto result = aggregate_ratings(engine.ratings().current(), {.skip_incomplete = true});
        json human = json::array();
        for (const auto& h : result.rows) human.push_back(to_json(h));
        json comparisons = json::array();
        for (const auto& c : compare_human(result.rows)) comparisons.push_back(to_json(c));
        return reply(200, {{"human", human}, {"comparisons", comparisons}, {"warnings", result.warnings}});
    }

    HttpReply dispatch(std::string_view method, std::string_view path, std::string_view body) {
        if (path == "/v1/health" && method == "GET") return reply(200, engine.health());
        if (path == "/v1/query" && method == "POST") return query(body);
        if (path == "/v1/graph/stats" && method == "GET") return graph_stats();
        if (path == "/v1/graph/chains" && method == "POST") return graph_chains(body);
        if (path == "/v1/ratings" && method == "POST") return ratings(body);
        if (path == "/v1/reports/comparison" && method == "GET") return comparison();
        if (path == "/v1/reload" && method == "POST") {
            engine.reload();
            return reply(200, engine.health());
        }
        return error_reply(404, "NotFound", std::string(method) + " " + std::string(path) + " is not an endpoint");
    }
};

Service::Service(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        const HttpReply r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    impl_->server.set_payload_max_length(1 << 20);
    impl_->server.Get(R"(/.*)", route);
    impl_->server.Post(R"(/.*)", route);
}

Service::~Service() { stop(); }

HttpReply Service::handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
        return impl_->dispatch(method, path, body);
    } catch (const Error& e) {
        return error_reply(http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return error_reply(500, "Internal", e.what());
    }
}

int Service::bind(const std::string& host, int port) {
    const int bound =
        port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
    return bound;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace kgcounsel
