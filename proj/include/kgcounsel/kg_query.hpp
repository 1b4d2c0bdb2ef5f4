#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kgcounsel/kg_store.hpp"

namespace kgcounsel {

struct KgRetrievalConfig {
    std::size_t max_interventions = 5;
    std::size_t max_chains = 10;
    std::size_t max_general = 8;
    std::size_t max_chain_length = 4;  // edges
    // Restrict chain seeds to causes flagged attributes["poverty_driver"] == "true".
    bool poverty_seeds_only = false;

    // Throws InvalidArgument when any limit is zero.
    void validate() const;

    bool operator==(const KgRetrievalConfig&) const = default;
};

struct NodeMatch {
    std::string node_id;
    double match_score = 0.0;  // (0, 1]

    bool operator==(const NodeMatch&) const = default;
};

struct CausalChain {
    std::vector<std::string> node_ids;
    std::vector<RelationKind> relation_kinds;  // node_ids.size() - 1 entries
    double relevance = 0.0;

    // "cause-001>EXACERBATES>cause-002>CAUSES>effect-004"
    std::string fingerprint() const;

    bool operator==(const CausalChain&) const = default;
};

struct InterventionSuggestion {
    std::string intervention_id;
    std::vector<std::string> addressed_causes;
    std::vector<std::string> mitigated_effects;
    std::vector<std::string> companions;  // COMPLEMENTS / REQUIRES targets
    double score = 0.0;

    bool operator==(const InterventionSuggestion&) const = default;
};

// Lexical grounding: score = |query ∩ label| / |label| over distinct
// normalized tokens. Sorted by (score desc, id asc); zero scores dropped.
// Throws EmptyQuery when no token survives normalization.
std::vector<NodeMatch> match_nodes(const KnowledgeGraph& graph,
                                   const std::vector<std::string>& query_terms);
std::vector<NodeMatch> match_nodes(const KnowledgeGraph& graph, std::string_view query_text);

// Simple CAUSES/EXACERBATES paths (>= 1 edge, <= max_chain_length edges)
// starting at matched Cause nodes. Relevance is the sum of seed scores of the
// nodes on the path, accumulated in path order.
std::vector<CausalChain> find_causal_chains(const KnowledgeGraph& graph,
                                            const std::vector<NodeMatch>& seeds,
                                            const KgRetrievalConfig& config);

// Interventions with ADDRESSES -> matched Cause or MITIGATES -> matched Effect.
std::vector<InterventionSuggestion> find_interventions_for(const KnowledgeGraph& graph,
                                                           const std::vector<NodeMatch>& problems,
                                                           const KgRetrievalConfig& config);

// Query-free ranking by out-degree over MITIGATES + ADDRESSES + LEADS_TO.
std::vector<InterventionSuggestion> general_effective_interventions(const KnowledgeGraph& graph,
                                                                    const KgRetrievalConfig& config);

// Ordering used for chains: relevance desc, then node-id sequence asc.
bool chain_ranks_before(const CausalChain& a, const CausalChain& b);

// True when every hop of the chain is an existing edge of the stated kind and
// the chain meets the shape rules (Cause start, no repeats, allowed kinds).
bool chain_is_valid(const KnowledgeGraph& graph, const CausalChain& chain);

}  // namespace kgcounsel
