#include <gtest/gtest.h>

#include "kgcounsel/kg_fixture.hpp"
#include "kgcounsel/kg_store.hpp"
#include "oracles.hpp"

using namespace kgcounsel;

namespace {

KgNode node(std::string id, NodeKind kind) { return {id, "label of " + id, kind, {}}; }

KnowledgeGraph one_of_each() {
    KnowledgeGraph g;
    for (auto kind : kAllNodeKinds) {
        g.add_node(node(std::string(to_string(kind)), kind));
        g.add_node(node(std::string(to_string(kind)) + "-2", kind));
    }
    return g;
}

}  // namespace

TEST(KgStore, AddNodeBaseCase) {
    KnowledgeGraph g;
    g.add_node(node("c1", NodeKind::Cause));
    EXPECT_EQ(g.node_count(), 1u);
    EXPECT_EQ(g.edge_count(), 0u);
    EXPECT_EQ(g.node("c1").kind, NodeKind::Cause);
}

TEST(KgStore, DuplicateAndBlankNodesRejected) {
    KnowledgeGraph g;
    g.add_node(node("c1", NodeKind::Cause));
    try {
        g.add_node(node("c1", NodeKind::Effect));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
    }
    try {
        g.add_node({"c2", " \t", NodeKind::Cause, {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyLabel);
    }
    EXPECT_EQ(g.node_count(), 1u);
}

TEST(KgStore, ManyDistinctNodesAreCounted) {
    KnowledgeGraph g;
    for (int i = 0; i < 308; ++i) g.add_node(node("n" + std::to_string(i), kAllNodeKinds[i % 5]));
    EXPECT_EQ(g.node_count(), 308u);
}

TEST(KgStore, EndpointRulesMatchConnectionLogicExhaustively) {
    std::size_t accepted = 0;
    for (auto r : kAllRelationKinds) {
        for (auto s : kAllNodeKinds) {
            for (auto t : kAllNodeKinds) {
                KnowledgeGraph g = one_of_each();
                const std::string src(to_string(s)), dst = std::string(to_string(t)) + "-2";
                const bool expect = testkit::connection_logic_allows(r, s, t);
                try {
                    g.add_edge({"e", src, dst, r, {}});
                    EXPECT_TRUE(expect) << to_string(r) << " " << src << "->" << dst;
                    ++accepted;
                } catch (const Error& e) {
                    EXPECT_FALSE(expect) << to_string(r) << " " << src << "->" << dst;
                    EXPECT_EQ(e.code(), ErrorCode::KindViolation);
                }
            }
        }
    }
    // 1+1+1+1+4+1+25+1+1 allowed (relation, source, target) combinations.
    EXPECT_EQ(accepted, 36u);
}

TEST(KgStore, KindViolationNamesExpectedAndActualKinds) {
    KnowledgeGraph g = one_of_each();
    try {
        g.add_edge({"bad", "Intervention", "Effect", RelationKind::Causes, {}});
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("Cause -> Effect"), std::string::npos) << msg;
        EXPECT_NE(msg.find("Intervention -> Effect"), std::string::npos) << msg;
    }
}

TEST(KgStore, EdgeErrorsLeaveGraphUntouched) {
    KnowledgeGraph g = one_of_each();
    g.add_edge({"e1", "Cause", "Effect", RelationKind::Causes, {"case-001"}});
    const auto before = g.to_document();

    auto expect_code = [&](KgEdge e, ErrorCode code) {
        try {
            g.add_edge(std::move(e));
            ADD_FAILURE() << "accepted";
        } catch (const Error& err) {
            EXPECT_EQ(err.code(), code);
        }
        const auto after = g.to_document();
        EXPECT_EQ(after.nodes, before.nodes);
        EXPECT_EQ(after.edges, before.edges);
    };
    expect_code({"e2", "Cause", "missing", RelationKind::Causes, {}}, ErrorCode::MissingEndpoint);
    expect_code({"e2", "Cause", "Effect", RelationKind::Causes, {}}, ErrorCode::DuplicateEdge);
    expect_code({"e1", "Intervention", "Effect", RelationKind::Mitigates, {}}, ErrorCode::DuplicateId);
    expect_code({"e2", "Effect", "Cause", RelationKind::Causes, {}}, ErrorCode::KindViolation);
    EXPECT_EQ(g.out_edges("Intervention").size(), 0u);
}

TEST(KgStore, SamePairMayCarryDifferentKinds) {
    KnowledgeGraph g = one_of_each();
    g.add_edge({"e1", "Cause", "Effect", RelationKind::Causes, {}});
    g.add_edge({"e2", "Cause", "Effect", RelationKind::RelatedTo, {}});
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_TRUE(g.has_triple("Cause", "Effect", RelationKind::RelatedTo));
    EXPECT_FALSE(g.has_triple("Effect", "Cause", RelationKind::RelatedTo));
}

TEST(KgStore, AdjacencyIsConsistentWithEdges) {
    SplitMix64 rng(7);
    for (int round = 0; round < 50; ++round) {
        const auto rg = testkit::random_graph(rng, 8);
        std::size_t out_total = 0, in_total = 0;
        for (const auto& [id, _] : rg.graph.nodes()) {
            for (const auto& eid : rg.graph.out_edges(id)) EXPECT_EQ(rg.graph.find_edge(eid)->source, id);
            for (const auto& eid : rg.graph.in_edges(id)) EXPECT_EQ(rg.graph.find_edge(eid)->target, id);
            out_total += rg.graph.out_edges(id).size();
            in_total += rg.graph.in_edges(id).size();
        }
        EXPECT_EQ(out_total, rg.graph.edge_count());
        EXPECT_EQ(in_total, rg.graph.edge_count());
        EXPECT_TRUE(validate_graph(rg.graph).ok());
    }
}

TEST(KgStore, StatsOfEmptyGraphAreZero) {
    const auto s = graph_stats(KnowledgeGraph{});
    EXPECT_EQ(s, StatsReport{});
}

TEST(KgStore, StatsPartitionTheEdgeSet) {
    SplitMix64 rng(11);
    for (int round = 0; round < 50; ++round) {
        const auto rg = testkit::random_graph(rng, 8);
        const auto s = graph_stats(rg.graph);
        std::size_t sum = 0, nodes = 0;
        for (auto k : s.by_relation) sum += k;
        for (auto k : s.by_node_kind) nodes += k;
        EXPECT_EQ(sum, s.edge_count);
        EXPECT_EQ(s.edge_count, rg.graph.edge_count());
        EXPECT_EQ(nodes, s.node_count);
    }
}

TEST(KgStore, ReferenceFixtureHasPublishedRelationCounts) {
    const auto s = graph_stats(generate_reference_graph());
    const std::array<std::size_t, 9> expected{368, 184, 92, 92, 23, 20, 20, 14, 9};
    EXPECT_EQ(s.by_relation, expected);
    EXPECT_EQ(s.node_count, 308u);
    EXPECT_TRUE(validate_graph(generate_reference_graph()).ok());
}

TEST(KgStore, ReferenceFixtureIsDeterministic) {
    EXPECT_EQ(save_graph(generate_reference_graph(2025)), save_graph(generate_reference_graph(2025)));
    EXPECT_NE(save_graph(generate_reference_graph(2025)), save_graph(generate_reference_graph(2026)));
}

TEST(KgStore, SaveLoadRoundTrip) {
    const auto g = generate_reference_graph();
    const std::string text = save_graph(g);
    const auto back = load_graph(text);
    EXPECT_EQ(graph_stats(back), graph_stats(g));
    EXPECT_EQ(save_graph(back), text);
    EXPECT_EQ(back.to_document().edges, g.to_document().edges);
}

TEST(KgStore, FileRoundTrip) {
    testkit::TempDir dir;
    const auto g = generate_reference_graph(3);
    save_graph_file(g, dir / "g.json");
    EXPECT_EQ(save_graph(load_graph_file(dir / "g.json")), save_graph(g));
}

TEST(KgStore, LoadRejectsMalformedDocuments) {
    for (const char* bad : {"", "{}", "[]", R"({"nodes": []})", R"({"nodes": [], "edges": [], "extra": 1})",
                            R"({"nodes": [{"id": "a", "label": "x", "kind": "Planet"}], "edges": []})"}) {
        try {
            load_graph(bad);
            ADD_FAILURE() << "accepted: " << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
        }
    }
}

TEST(KgStore, LoadRejectsKindViolationWithReport) {
    const std::string doc = R"({"nodes": [
        {"id": "i1", "label": "walk", "kind": "Intervention"},
        {"id": "e1", "label": "sleep problems", "kind": "Effect"}],
      "edges": [{"id": "x1", "source": "i1", "target": "e1", "kind": "CAUSES"}]})";
    try {
        load_graph(doc);
        FAIL();
    } catch (const GraphValidationError& e) {
        EXPECT_EQ(e.code(), ErrorCode::ValidationError);
        ASSERT_EQ(e.report().findings.size(), 1u);
        EXPECT_EQ(e.report().findings[0].subject, "x1");
        EXPECT_EQ(e.report().findings[0].code, ErrorCode::KindViolation);
    }
}

TEST(KgStore, ValidateReportsDanglingEndpointOnce) {
    GraphDocument doc;
    doc.nodes = {node("c1", NodeKind::Cause)};
    doc.edges = {{"x", "c1", "ghost", RelationKind::RelatedTo, {}}};
    const auto report = validate_graph(doc);
    ASSERT_EQ(report.findings.size(), 1u);
    EXPECT_EQ(report.findings[0].code, ErrorCode::MissingEndpoint);
}

TEST(KgStore, EveryInjectedViolationIsReportedExactlyOnce) {
    SplitMix64 rng(99);
    for (int round = 0; round < 40; ++round) {
        auto doc = generate_reference_graph(round).to_document();
        std::set<std::string> injected;
        const auto& nodes = doc.nodes;
        for (int i = 0; i < 10; ++i) {
            const auto& a = nodes[rng.below(nodes.size())];
            const auto& b = nodes[rng.below(nodes.size())];
            const auto kind = kAllRelationKinds[rng.below(9)];
            if (endpoint_rule(kind, a.kind, b.kind)) continue;
            const std::string id = "inj-" + std::to_string(i);
            doc.edges.push_back({id, a.id, b.id, kind, {}});
            injected.insert(id);
        }
        const auto report = validate_graph(doc);
        std::multiset<std::string> reported;
        for (const auto& f : report.findings) {
            EXPECT_EQ(f.code, ErrorCode::KindViolation);
            reported.insert(f.subject);
        }
        EXPECT_EQ(std::set<std::string>(reported.begin(), reported.end()), injected);
        EXPECT_EQ(reported.size(), injected.size());
    }
}

TEST(KgStore, KindNamesRoundTrip) {
    for (auto k : kAllRelationKinds) EXPECT_EQ(parse_relation_kind(to_string(k)), k);
    for (auto k : kAllNodeKinds) EXPECT_EQ(parse_node_kind(to_string(k)), k);
    EXPECT_FALSE(parse_relation_kind("causes"));
}
