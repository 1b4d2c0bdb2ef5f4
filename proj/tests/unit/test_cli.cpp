#include <gtest/gtest.h>

#include <sstream>

#include "kgcounsel/cli.hpp"
#include "kgcounsel/io.hpp"
#include "oracles.hpp"

using namespace kgcounsel;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "kgcounsel");
    std::ostringstream out, err;
    const int code = cli_run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, HelpAndVersionExitZero) {
    EXPECT_EQ(run({"--help"}).code, 0);
    const auto v = run({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("0.1.0"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"query"}).code, 2);
    const auto r = run({"query", "x", "--mode", "graph"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
    EXPECT_EQ(run({"chunk", "/no/such/file", "--out", "x"}).code, 2);
}

TEST(Cli, RuntimeErrorsExitOne) {
    testkit::TempDir dir;
    write_file(dir / "cases.jsonl", "{not json}\n");
    const auto r = run({"chunk", (dir / "cases.jsonl").string(), "--out", (dir / "c.jsonl").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error [ParseError]"), std::string::npos);
    EXPECT_EQ(run({"query", "debt", "--mode", "kg"}).code, 1);  // no graph configured
}

TEST(Cli, ConfigShowRejectsSecrets) {
    testkit::TempDir dir;
    write_file(dir / "c.json", R"({"generation": {"api_key": "sk-live"}})");
    const auto r = run({"--config", (dir / "c.json").string(), "config", "show"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("ConfigError"), std::string::npos);
    const auto ok = run({"config", "show"});
    EXPECT_EQ(ok.code, 0);
    EXPECT_EQ(json::parse(ok.out)["retrieval"]["k"], 3);
}

TEST(Cli, GraphFixtureStatsAndValidate) {
    testkit::TempDir dir;
    const auto graph = (dir / "graph.json").string();
    ASSERT_EQ(run({"graph", "generate-fixture", "--out", graph}).code, 0);
    EXPECT_EQ(run({"graph", "validate", graph}).code, 0);
    const auto stats = run({"graph", "stats", graph, "--format", "json"});
    ASSERT_EQ(stats.code, 0);
    EXPECT_EQ(json::parse(stats.out)["nodes"], 308);

    auto doc = json::parse(read_file(graph));
    for (auto& e : doc["edges"]) {
        if (e["kind"] == "CAUSES") {
            e["kind"] = "LEADS_TO";
            break;
        }
    }
    write_file(dir / "bad.json", doc.dump());
    const auto bad = run({"graph", "validate", (dir / "bad.json").string()});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.out.find("KindViolation"), std::string::npos);
}

TEST(Cli, EvalAggregateAndReport) {
    testkit::TempDir dir;
    std::string lines;
    for (const auto& h : testkit::published_scores().human) {
        for (const auto& r : testkit::ratings_for_tenths(h.model_id, h.mode, h.category_tenths)) {
            lines += to_json(r).dump() + "\n";
        }
    }
    write_file(dir / "ratings.jsonl", lines);
    const auto agg = run({"eval", "aggregate", (dir / "ratings.jsonl").string()});
    ASSERT_EQ(agg.code, 0) << agg.err;
    EXPECT_NE(agg.out.find("Gemma-3-27b RAG:"), std::string::npos);
    EXPECT_NE(agg.out.find("overall=3.3"), std::string::npos);

    const auto scores = std::string(KGC_SOURCE_DIR) + "/data/fixtures/published_scores.json";
    const auto rep = run({"report", "--scores", scores, "--ratings", (dir / "ratings.jsonl").string(), "--out",
                          (dir / "report").string()});
    ASSERT_EQ(rep.code, 0) << rep.err;
    EXPECT_NE(rep.out.find("Best SBERT: GPT-4.1 (86.22)"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "report/paired.csv"));
}

TEST(Cli, EvalRunScoresPairs) {
    testkit::TempDir dir;
    write_file(dir / "pairs.jsonl", R"({"id": "a", "candidate": "sleep well", "reference": "sleep well"})"
                                    "\n");
    const auto r = run({"eval", "run", (dir / "pairs.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("BERTScore F1: 100.00"), std::string::npos);
}
