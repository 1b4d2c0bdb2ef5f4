#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "kgcounsel/corpus.hpp"
#include "kgcounsel/engine.hpp"
#include "kgcounsel/http_clients.hpp"
#include "kgcounsel/kg_fixture.hpp"
#include "kgcounsel/service.hpp"
#include "oracles.hpp"

// After Eigen: <resolv.h> defines a _res macro that Eigen uses as a name.
#include "httplib.h"

using namespace kgcounsel;
using nlohmann::json;
using std::chrono::milliseconds;

namespace {

// Loopback stand-in for a hosted provider.
class FakeProvider {
public:
    FakeProvider() {
        server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            if (fail_next > 0) {
                --fail_next;
                res.status = fail_status;
                return;
            }
            HashEmbeddingProvider hash(8);
            json data = json::array();
            const auto body = json::parse(req.body);
            for (const auto& text : body.at("input")) {
                const auto v = hash.embed(text.get<std::string>());
                data.push_back({{"embedding", std::vector<double>(v.data(), v.data() + v.size())}});
            }
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        server_.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
            last_auth = req.get_header_value("Authorization");
            ++generate_calls;
            if (delay.count() > 0) std::this_thread::sleep_for(delay);
            if (fail_next > 0) {
                --fail_next;
                res.status = fail_status;
                return;
            }
            const auto body = json::parse(req.body);
            last_model = body.at("model").get<std::string>();
            res.set_content(json{{"text", "Echo [S1] " + last_model},
                                 {"usage", {{"prompt_tokens", 10}, {"output_tokens", 3}}}}
                                .dump(),
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeProvider() {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

    std::atomic<int> fail_next{0};
    int fail_status = 503;
    milliseconds delay{0};
    std::atomic<int> generate_calls{0};
    std::string last_auth;
    std::string last_model;

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

const auto kNoSleep = [](milliseconds) {};

PromptBundle tiny_prompt() {
    GroundingContext c;
    c.snippets = {{"case-001/s1/w1", "case-001", 1, "sleep", 1.0}};
    return render_prompt(c, "sleep", "rag_v1");
}

EngineConfig engine_config() {
    EngineConfig c;
    c.embedding.dim = 64;
    return c;
}

std::unique_ptr<Engine> make_engine(const EngineConfig& config = engine_config()) {
    auto engine = std::make_unique<Engine>(config, make_embedding_provider(config), make_generation_client(config),
                                           fixed_clock(parse_utc("2025-01-01T00:00:00Z")));
    EngineSnapshot snap;
    snap.graph = generate_reference_graph();
    snap.index = build_index(chunk_cases(generate_corpus()), engine->embedder());
    engine->set_snapshot(std::move(snap));
    return engine;
}

json body_of(const HttpReply& r) { return json::parse(r.body); }

}  // namespace

TEST(Endpoint, ParsesAndRejects) {
    const auto e = Endpoint::parse("http://localhost:9000/v1/embeddings");
    EXPECT_EQ(e.scheme_host_port, "http://localhost:9000");
    EXPECT_EQ(e.path, "/v1/embeddings");
    EXPECT_EQ(Endpoint::parse("http://h").path, "/");
    EXPECT_THROW(Endpoint::parse("ftp://h/x"), Error);
    EXPECT_THROW(Endpoint::parse("localhost:9000"), Error);
}

TEST(HttpEmbedding, EmbedsAndSendsBearerKey) {
    FakeProvider fake;
    HttpEmbeddingProvider p(fake.url("/v1/embeddings"), "m", 8, "sk-test");
    const auto v = p.embed_texts({"debt worry", "sleep"});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], HashEmbeddingProvider(8).embed("debt worry"));
    EXPECT_EQ(fake.last_auth, "Bearer sk-test");
    const auto m = p.embed_tokens("Debt, worry!");
    EXPECT_EQ(m.rows(), 2);
    EXPECT_EQ(m.cols(), 8);
    EXPECT_EQ(p.name(), "http:m");
}

TEST(HttpEmbedding, NoKeyMeansNoAuthorizationHeader) {
    FakeProvider fake;
    HttpEmbeddingProvider p(fake.url("/v1/embeddings"), "m", 8, "");
    p.embed_texts({"x"});
    EXPECT_EQ(fake.last_auth, "");
}

TEST(HttpEmbedding, ServerErrorsRetryThroughIndexBuild) {
    FakeProvider fake;
    fake.fail_next = 2;
    HttpEmbeddingProvider p(fake.url("/v1/embeddings"), "m", 8, "");
    BuildStats stats;
    const auto index = build_index({{"x", "c", 1, 1, 1, "debt"}}, p,
                                   {.retry = {3, milliseconds{1}, 2.0}, .sleep = kNoSleep}, &stats);
    EXPECT_EQ(stats.retries, 2);
    EXPECT_EQ(index.size(), 1u);
}

TEST(HttpEmbedding, ClientErrorsFailFast) {
    FakeProvider fake;
    fake.fail_next = 1;
    fake.fail_status = 401;
    HttpEmbeddingProvider p(fake.url("/v1/embeddings"), "m", 8, "");
    try {
        build_index({{"x", "c", 1, 1, 1, "debt"}}, p, {.sleep = kNoSleep});
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.status(), 401);
        EXPECT_FALSE(e.retryable());
        EXPECT_EQ(e.attempts(), 1);
    }
}

TEST(HttpEmbedding, DimensionMismatchIsDrift) {
    FakeProvider fake;
    HttpEmbeddingProvider p(fake.url("/v1/embeddings"), "m", 16, "");
    try {
        p.embed_tokens("debt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimDrift);
    }
}

TEST(HttpEmbedding, UnreachableHostIsRetryable) {
    HttpEmbeddingProvider p("http://127.0.0.1:1/v1/embeddings", "m", 8, "", milliseconds{200});
    try {
        p.embed_texts({"x"});
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.status(), 0);
        EXPECT_TRUE(e.retryable());
    }
}

TEST(HttpGeneration, DraftsThroughTheWire) {
    FakeProvider fake;
    HttpGenerationClient client(fake.url("/v1/generate"), "fake", "gen-key");
    GenerationParams params;
    params.model_id = "remote-model";
    DraftOptions options;
    options.sleep = kNoSleep;
    const auto draft = generate_draft(client, tiny_prompt(), params, options);
    EXPECT_EQ(draft.text, "Echo [S1] remote-model");
    EXPECT_EQ(draft.cited_chunk_ids, std::vector<std::string>{"case-001/s1/w1"});
    EXPECT_EQ(draft.output_tokens, 3u);
    EXPECT_EQ(fake.last_auth, "Bearer gen-key");
}

TEST(HttpGeneration, ServerErrorsAreRetried) {
    FakeProvider fake;
    fake.fail_next = 2;
    fake.fail_status = 502;
    HttpGenerationClient client(fake.url("/v1/generate"), "fake", "");
    DraftOptions options;
    options.sleep = kNoSleep;
    const auto draft = generate_draft(client, tiny_prompt(), {}, options);
    EXPECT_EQ(draft.retries, 2);
    EXPECT_EQ(fake.generate_calls.load(), 3);
}

TEST(HttpGeneration, RateLimitAndAuthErrorsSurface) {
    FakeProvider fake;
    fake.fail_next = 1;
    fake.fail_status = 403;
    HttpGenerationClient client(fake.url("/v1/generate"), "fake", "");
    DraftOptions options;
    options.sleep = kNoSleep;
    try {
        generate_draft(client, tiny_prompt(), {}, options);
        FAIL();
    } catch (const ClientError& e) {
        EXPECT_EQ(e.status(), 403);
    }
    EXPECT_EQ(fake.generate_calls.load(), 1);
}

TEST(HttpGeneration, SlowEndpointTimesOut) {
    FakeProvider fake;
    fake.delay = milliseconds{1500};
    HttpGenerationClient client(fake.url("/v1/generate"), "fake", "");
    DraftOptions options;
    options.sleep = kNoSleep;
    options.timeout = milliseconds{200};
    options.retry = {1, milliseconds{0}, 2.0};
    EXPECT_THROW(generate_draft(client, tiny_prompt(), {}, options), TimeoutError);
}

TEST(Service, HealthReportsArtifacts) {
    auto engine = make_engine();
    Service service(*engine);
    const auto r = service.handle("GET", "/v1/health", "");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(body_of(r)["status"], "ok");
    EXPECT_EQ(body_of(r)["graph"], "ok");

    const auto config = engine_config();
    Engine empty(config, make_embedding_provider(config), make_generation_client(config));
    Service bare(empty);
    EXPECT_EQ(body_of(bare.handle("GET", "/v1/health", ""))["status"], "degraded");
    EXPECT_EQ(bare.handle("GET", "/v1/graph/stats", "").status, 503);
    EXPECT_EQ(bare.handle("POST", "/v1/query", R"({"query": "debt"})").status, 503);
}

TEST(Service, RagQuery) {
    auto engine = make_engine();
    Service service(*engine);
    const auto r = service.handle("POST", "/v1/query", R"({"query": "I lost my job and cannot sleep", "mode": "rag"})");
    ASSERT_EQ(r.status, 200) << r.body;
    const auto body = body_of(r);
    EXPECT_EQ(body["context"]["snippets"].size(), 3u);
    EXPECT_TRUE(body["context"]["chains"].empty());
    EXPECT_EQ(body["draft"]["created_at"], "2025-01-01T00:00:00.000Z");
    EXPECT_EQ(service.handle("POST", "/v1/query", R"({"query": "I lost my job and cannot sleep", "mode": "rag"})").body,
              r.body);
}

TEST(Service, KgQueryRespectsLimitsAndOnlyTightens) {
    auto engine = make_engine();
    Service service(*engine);
    const auto r = service.handle(
        "POST", "/v1/query",
        R"({"query": "I lost my job and cannot sleep", "mode": "kg", "limits": {"max_chains": 2, "max_general": 50}})");
    ASSERT_EQ(r.status, 200) << r.body;
    const auto ctx = body_of(r)["context"];
    EXPECT_LE(ctx["chains"].size(), 2u);
    EXPECT_FALSE(ctx["chains"].empty());
    EXPECT_EQ(ctx["general"].size(), 8u);
    EXPECT_TRUE(ctx["snippets"].empty());

    const auto with = body_of(service.handle(
        "POST", "/v1/query", R"({"query": "I lost my job and cannot sleep", "mode": "kg", "include_snippets": true})"));
    EXPECT_EQ(with["context"]["snippets"].size(), 3u);

    const auto two = body_of(service.handle(
        "POST", "/v1/query", R"({"query": "I lost my job and cannot sleep", "mode": "kg", "two_stage": true})"));
    EXPECT_EQ(two["draft"]["stages"], 2);
}

TEST(Service, BadRequests) {
    auto engine = make_engine();
    Service service(*engine);
    EXPECT_EQ(service.handle("POST", "/v1/query", "{").status, 400);
    EXPECT_EQ(service.handle("POST", "/v1/query", R"({"q": "x"})").status, 400);
    EXPECT_EQ(service.handle("POST", "/v1/query", R"({"query": "x", "mode": "graph"})").status, 400);
    EXPECT_EQ(service.handle("POST", "/v1/query", R"({"query": "?!"})").status, 400);
    EXPECT_EQ(body_of(service.handle("POST", "/v1/query", R"({"query": "?!"})"))["error"]["code"], "EmptyQuery");
    EXPECT_EQ(service.handle("POST", "/v1/query", R"({"query": "x", "limits": {"max_chains": 0}})").status, 400);
    const std::string big = json{{"query", std::string(4001, 'a')}}.dump();
    EXPECT_EQ(service.handle("POST", "/v1/query", big).status, 413);
    EXPECT_EQ(service.handle("GET", "/v1/nothing", "").status, 404);
    EXPECT_EQ(service.handle("GET", "/v1/query", "").status, 404);
}

TEST(Service, GraphStatsAndChains) {
    auto engine = make_engine();
    Service service(*engine);
    const auto stats = body_of(service.handle("GET", "/v1/graph/stats", ""));
    EXPECT_EQ(stats["nodes"], 308);
    EXPECT_EQ(stats["relations"]["MITIGATES"], 368);
    EXPECT_EQ(stats["relations"]["CAUSES"], 92);

    const auto chains = service.handle("POST", "/v1/graph/chains", R"({"query": "job loss", "limits": {"max_chains": 3}})");
    ASSERT_EQ(chains.status, 200);
    const auto body = body_of(chains);
    EXPECT_LE(body["chains"].size(), 3u);
    EXPECT_FALSE(body["matches"].empty());
    for (const auto& c : body["chains"]) EXPECT_NE(c["text"].get<std::string>().find("→"), std::string::npos);
}

TEST(Service, RatingsFeedTheComparison) {
    testkit::TempDir dir;
    auto config = engine_config();
    config.paths.ratings = (dir / "ratings.jsonl").string();
    auto engine = make_engine(config);
    Service service(*engine);
    json list = json::array();
    for (const auto& r : testkit::ratings_for_tenths("m", EvalMode::Rag, {25, 25, 25, 25, 25})) list.push_back(to_json(r));
    for (const auto& r : testkit::ratings_for_tenths("m", EvalMode::Kg, {20, 15, 20, 15, 20})) list.push_back(to_json(r));
    auto partial = testkit::ratings_for_tenths("n", EvalMode::Rag, {30, 30, 30, 30, 30});
    for (const auto& r : partial) {
        if (r.category != partial.back().category) list.push_back(to_json(r));
    }
    const auto posted = service.handle("POST", "/v1/ratings", json{{"ratings", list}}.dump());
    ASSERT_EQ(posted.status, 200) << posted.body;
    EXPECT_EQ(body_of(posted)["stored"], 28);

    const auto cmp = body_of(service.handle("GET", "/v1/reports/comparison", ""));
    ASSERT_EQ(cmp["comparisons"].size(), 1u);
    EXPECT_EQ(cmp["comparisons"][0]["delta"], "-0.70");
    EXPECT_EQ(cmp["warnings"].size(), 1u);

    json bad = json::array({json{{"rater_id", "a"}, {"model_id", "m"}, {"mode", "RAG"}, {"category", "Wording"},
                                 {"value", 9}}});
    EXPECT_EQ(service.handle("POST", "/v1/ratings", bad.dump()).status, 400);
    EXPECT_EQ(RatingLog(dir / "ratings.jsonl").size(), 28u);
}

TEST(Service, ReloadSwapsSnapshot) {
    testkit::TempDir dir;
    save_graph_file(generate_reference_graph(), dir / "graph.json");
    auto config = engine_config();
    config.paths.graph = (dir / "graph.json").string();
    Engine engine(config, make_embedding_provider(config), make_generation_client(config));
    Service service(engine);
    EXPECT_EQ(body_of(service.handle("GET", "/v1/health", ""))["graph"], "absent");
    const auto r = service.handle("POST", "/v1/reload", "");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(body_of(r)["graph"], "ok");
    EXPECT_EQ(body_of(r)["index"], "absent");

    std::filesystem::remove(dir / "graph.json");
    EXPECT_EQ(service.handle("POST", "/v1/reload", "").status, 503);
    EXPECT_EQ(body_of(service.handle("GET", "/v1/health", ""))["graph"], "ok");
}

TEST(Service, ServesOverLoopback) {
    auto engine = make_engine();
    Service service(*engine);
    const int port = service.bind("127.0.0.1", 0);
    service.start();
    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/v1/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(json::parse(health->body)["status"], "ok");

    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            httplib::Client c("127.0.0.1", port);
            const std::string q = json{{"query", "debt and worry " + std::to_string(t)}, {"mode", t % 2 ? "kg" : "rag"}}.dump();
            auto res = c.Post("/v1/query", q, "application/json");
            if (res && res->status == 200) ++ok;
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok.load(), 4);

    auto missing = client.Get("/v1/missing");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    service.stop();
}
