#include <gtest/gtest.h>

#include "kgcounsel/kg_fixture.hpp"
#include "kgcounsel/kg_query.hpp"
#include "oracles.hpp"

using namespace kgcounsel;

namespace {

// job loss -> sleep problems, job loss -EXACERBATES-> debt -> worry, plus interventions.
KnowledgeGraph small_graph() {
    KnowledgeGraph g;
    g.add_node({"c-job", "job loss", NodeKind::Cause, {{"poverty_driver", "true"}}});
    g.add_node({"c-debt", "loan debt", NodeKind::Cause, {}});
    g.add_node({"e-sleep", "sleep problems", NodeKind::Effect, {}});
    g.add_node({"e-worry", "constant worry", NodeKind::Effect, {}});
    g.add_node({"i-walk", "evening walk", NodeKind::Intervention, {}});
    g.add_node({"i-budget", "budget planning", NodeKind::Intervention, {}});
    g.add_node({"i-group", "savings group referral", NodeKind::Intervention, {}});
    g.add_node({"o-calm", "better sleep", NodeKind::Outcome, {}});
    g.add_edge({"1", "c-job", "e-sleep", RelationKind::Causes, {}});
    g.add_edge({"2", "c-job", "c-debt", RelationKind::Exacerbates, {}});
    g.add_edge({"3", "c-debt", "e-worry", RelationKind::Causes, {}});
    g.add_edge({"4", "i-walk", "e-sleep", RelationKind::Mitigates, {}});
    g.add_edge({"5", "i-budget", "c-debt", RelationKind::Addresses, {}});
    g.add_edge({"6", "i-budget", "c-job", RelationKind::Addresses, {}});
    g.add_edge({"7", "i-budget", "i-group", RelationKind::Complements, {}});
    g.add_edge({"8", "i-walk", "o-calm", RelationKind::LeadsTo, {}});
    g.add_edge({"9", "i-group", "c-debt", RelationKind::Addresses, {}});
    return g;
}

}  // namespace

TEST(KgQuery, MatchScoresAreLabelOverlapFractions) {
    const auto m = match_nodes(small_graph(), "I lost my JOB and the debt keeps me awake");
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m[0].node_id, "c-debt");  // 1/2 ties with c-job; id breaks the tie
    EXPECT_DOUBLE_EQ(m[0].match_score, 0.5);
    EXPECT_EQ(m[1].node_id, "c-job");
}

TEST(KgQuery, FullLabelMatchScoresOne) {
    const auto m = match_nodes(small_graph(), "sleep problems");
    ASSERT_FALSE(m.empty());
    EXPECT_EQ(m[0].node_id, "e-sleep");
    EXPECT_EQ(m[0].match_score, 1.0);
}

TEST(KgQuery, EmptyQueryIsRejected) {
    for (const char* q : {"", "   ", "?!.,"}) {
        try {
            match_nodes(small_graph(), q);
            ADD_FAILURE() << q;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::EmptyQuery);
        }
    }
}

TEST(KgQuery, ChainsFollowCausalEdgesOnly) {
    const auto g = small_graph();
    const auto chains = find_causal_chains(g, {{"c-job", 1.0}}, {});
    std::vector<std::string> fps;
    for (const auto& c : chains) {
        fps.push_back(c.fingerprint());
        EXPECT_TRUE(chain_is_valid(g, c));
    }
    // Equal relevance, so node-id sequences decide: c-debt sorts before e-sleep.
    const std::vector<std::string> expected{
        "c-job>EXACERBATES>c-debt",
        "c-job>EXACERBATES>c-debt>CAUSES>e-worry",
        "c-job>CAUSES>e-sleep",
    };
    EXPECT_EQ(fps, expected);
}

TEST(KgQuery, ChainRelevanceSumsSeedScoresAlongThePath) {
    const auto chains = find_causal_chains(small_graph(), {{"c-job", 0.5}, {"e-worry", 1.0}}, {});
    ASSERT_FALSE(chains.empty());
    EXPECT_EQ(chains[0].fingerprint(), "c-job>EXACERBATES>c-debt>CAUSES>e-worry");
    EXPECT_DOUBLE_EQ(chains[0].relevance, 1.5);
}

TEST(KgQuery, ChainLengthAndCountLimits) {
    KgRetrievalConfig config;
    config.max_chain_length = 1;
    EXPECT_EQ(find_causal_chains(small_graph(), {{"c-job", 1.0}}, config).size(), 2u);
    config.max_chain_length = 4;
    config.max_chains = 1;
    EXPECT_EQ(find_causal_chains(small_graph(), {{"c-job", 1.0}}, config).size(), 1u);
}

TEST(KgQuery, PovertySeedFilter) {
    KgRetrievalConfig config;
    config.poverty_seeds_only = true;
    const auto chains = find_causal_chains(small_graph(), {{"c-debt", 1.0}, {"c-job", 0.25}}, config);
    for (const auto& c : chains) EXPECT_EQ(c.node_ids.front(), "c-job");
    EXPECT_FALSE(chains.empty());
}

TEST(KgQuery, ZeroLimitsAreRejected) {
    KgRetrievalConfig config;
    config.max_chains = 0;
    EXPECT_THROW(find_causal_chains(small_graph(), {}, config), Error);
}

TEST(KgQuery, ChainsMatchBruteForceOnRandomGraphs) {
    SplitMix64 rng(2024);
    for (int round = 0; round < 300; ++round) {
        const auto rg = testkit::random_graph(rng, 8);
        const auto got = find_causal_chains(rg.graph, rg.seeds, rg.config);
        const auto want = testkit::brute_force_chains(rg.graph, rg.seeds, rg.config);
        ASSERT_EQ(got, want) << "round " << round;
        for (const auto& c : got) {
            EXPECT_TRUE(chain_is_valid(rg.graph, c));
            EXPECT_LE(c.relation_kinds.size(), rg.config.max_chain_length);
        }
    }
}

TEST(KgQuery, InterventionsForMatchedProblems) {
    const auto g = small_graph();
    const auto s = find_interventions_for(g, {{"c-debt", 1.0}, {"e-sleep", 0.5}}, {});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].intervention_id, "i-budget");
    EXPECT_EQ(s[0].addressed_causes, std::vector<std::string>{"c-debt"});
    EXPECT_EQ(s[0].companions, std::vector<std::string>{"i-group"});
    EXPECT_EQ(s[1].intervention_id, "i-group");
    EXPECT_EQ(s[2].intervention_id, "i-walk");
    EXPECT_EQ(s[2].mitigated_effects, std::vector<std::string>{"e-sleep"});
    EXPECT_DOUBLE_EQ(s[2].score, 0.5);
}

TEST(KgQuery, GeneralInterventionsRankByBeneficialOutDegree) {
    const auto s = general_effective_interventions(small_graph(), {});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].intervention_id, "i-budget");  // two ADDRESSES
    EXPECT_EQ(s[1].intervention_id, "i-walk");    // MITIGATES + LEADS_TO
    EXPECT_EQ(s[2].intervention_id, "i-group");
    EXPECT_DOUBLE_EQ(s[0].score, 2.0);
}

TEST(KgQuery, ReferenceGraphDemoQueryFindsEvidence) {
    const auto g = generate_reference_graph();
    const auto matches = match_nodes(g, "I lost my job and cannot sleep");
    const auto chains = find_causal_chains(g, matches, {});
    const auto interventions = find_interventions_for(g, matches, {});
    EXPECT_FALSE(chains.empty());
    EXPECT_FALSE(interventions.empty());
    EXPECT_LE(chains.size(), 10u);
    EXPECT_LE(interventions.size(), 5u);
    EXPECT_EQ(general_effective_interventions(g, {}).size(), 8u);
}

TEST(KgQuery, ChainValidityRejectsForgedChains) {
    const auto g = small_graph();
    EXPECT_FALSE(chain_is_valid(g, {{"c-job", "e-worry"}, {RelationKind::Causes}, 1.0}));
    EXPECT_FALSE(chain_is_valid(g, {{"i-walk", "e-sleep"}, {RelationKind::Mitigates}, 1.0}));
    EXPECT_FALSE(chain_is_valid(g, {{"c-job"}, {}, 1.0}));
    EXPECT_TRUE(chain_is_valid(g, {{"c-job", "e-sleep"}, {RelationKind::Causes}, 1.0}));
}
