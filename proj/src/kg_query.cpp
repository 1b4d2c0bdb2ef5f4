#include "kgcounsel/kg_query.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "kgcounsel/text.hpp"

namespace kgcounsel {

namespace {

bool is_chain_relation(RelationKind kind) {
    return kind == RelationKind::Causes || kind == RelationKind::Exacerbates;
}

bool is_beneficial(RelationKind kind) {
    return kind == RelationKind::Mitigates || kind == RelationKind::Addresses ||
           kind == RelationKind::LeadsTo;
}

bool suggestion_ranks_before(const InterventionSuggestion& a, const InterventionSuggestion& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.intervention_id < b.intervention_id;
}

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<std::string> companions_of(const KnowledgeGraph& graph, const std::string& id) {
    std::vector<std::string> out;
    for (const auto& eid : graph.out_edges(id)) {
        const KgEdge& e = *graph.find_edge(eid);
        if (e.kind == RelationKind::Complements || e.kind == RelationKind::Requires) {
            out.push_back(e.target);
        }
    }
    sort_unique(out);
    return out;
}

struct ChainSearch {
    const KnowledgeGraph& graph;
    const std::map<std::string, double, std::less<>>& seed_scores;
    std::size_t max_edges;
    std::vector<CausalChain>& out;

    std::vector<std::string> nodes;
    std::vector<RelationKind> kinds;
    std::set<std::string, std::less<>> on_path;

    void emit() {
        CausalChain chain{nodes, kinds, 0.0};
        for (const auto& id : nodes) {
            if (auto it = seed_scores.find(id); it != seed_scores.end()) chain.relevance += it->second;
        }
        out.push_back(std::move(chain));
    }

    void extend() {
        if (kinds.size() >= max_edges) return;
        for (const auto& eid : graph.out_edges(nodes.back())) {
            const KgEdge& e = *graph.find_edge(eid);
            if (!is_chain_relation(e.kind) || on_path.count(e.target)) continue;
            nodes.push_back(e.target);
            kinds.push_back(e.kind);
            on_path.insert(e.target);
            emit();
            extend();
            on_path.erase(e.target);
            kinds.pop_back();
            nodes.pop_back();
        }
    }
};

}  // namespace

void KgRetrievalConfig::validate() const {
    if (max_interventions < 1 || max_chains < 1 || max_general < 1 || max_chain_length < 1) {
        throw Error(ErrorCode::InvalidArgument, "KG retrieval limits must all be >= 1");
    }
}

std::string CausalChain::fingerprint() const {
    std::string out;
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
        if (i) {
            out += '>';
            out += to_string(relation_kinds[i - 1]);
            out += '>';
        }
        out += node_ids[i];
    }
    return out;
}

std::vector<NodeMatch> match_nodes(const KnowledgeGraph& graph,
                                   const std::vector<std::string>& query_terms) {
    std::set<std::string> query;
    for (const auto& term : query_terms) {
        for (auto& tok : normalized_tokens(term)) query.insert(std::move(tok));
    }
    if (query.empty()) throw Error(ErrorCode::EmptyQuery, "query has no usable terms");

    std::vector<NodeMatch> matches;
    for (const auto& [id, node] : graph.nodes()) {
        const auto label = token_set(node.label);
        if (label.empty()) continue;
        std::size_t hits = 0;
        for (const auto& tok : label) hits += query.count(tok);
        if (hits == 0) continue;
        matches.push_back({id, static_cast<double>(hits) / static_cast<double>(label.size())});
    }
    std::sort(matches.begin(), matches.end(), [](const NodeMatch& a, const NodeMatch& b) {
        if (a.match_score != b.match_score) return a.match_score > b.match_score;
        return a.node_id < b.node_id;
    });
    return matches;
}

std::vector<NodeMatch> match_nodes(const KnowledgeGraph& graph, std::string_view query_text) {
    return match_nodes(graph, split_words(query_text));
}

bool chain_ranks_before(const CausalChain& a, const CausalChain& b) {
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    return a.node_ids < b.node_ids;
}

std::vector<CausalChain> find_causal_chains(const KnowledgeGraph& graph,
                                            const std::vector<NodeMatch>& seeds,
                                            const KgRetrievalConfig& config) {
    config.validate();
    std::map<std::string, double, std::less<>> seed_scores;
    for (const auto& m : seeds) {
        if (m.match_score > 0.0 && graph.find_node(m.node_id)) {
            auto [it, inserted] = seed_scores.emplace(m.node_id, m.match_score);
            if (!inserted) it->second = std::max(it->second, m.match_score);
        }
    }

    std::vector<CausalChain> chains;
    for (const auto& [id, score] : seed_scores) {
        const KgNode& start = graph.node(id);
        if (start.kind != NodeKind::Cause) continue;
        if (config.poverty_seeds_only) {
            auto it = start.attributes.find("poverty_driver");
            if (it == start.attributes.end() || it->second != "true") continue;
        }
        ChainSearch search{graph, seed_scores, config.max_chain_length, chains, {id}, {}, {id}};
        search.extend();
    }

    std::sort(chains.begin(), chains.end(), chain_ranks_before);
    chains.erase(std::unique(chains.begin(), chains.end(),
                             [](const CausalChain& a, const CausalChain& b) {
                                 return a.node_ids == b.node_ids &&
                                        a.relation_kinds == b.relation_kinds;
                             }),
                 chains.end());
    if (chains.size() > config.max_chains) chains.resize(config.max_chains);
    return chains;
}

std::vector<InterventionSuggestion> find_interventions_for(const KnowledgeGraph& graph,
                                                           const std::vector<NodeMatch>& problems,
                                                           const KgRetrievalConfig& config) {
    config.validate();
    std::map<std::string, double, std::less<>> problem_scores;
    for (const auto& m : problems) {
        const KgNode* n = graph.find_node(m.node_id);
        if (!n || m.match_score <= 0.0) continue;
        if (n->kind != NodeKind::Cause && n->kind != NodeKind::Effect) continue;
        auto [it, inserted] = problem_scores.emplace(m.node_id, m.match_score);
        if (!inserted) it->second = std::max(it->second, m.match_score);
    }

    std::map<std::string, InterventionSuggestion, std::less<>> candidates;
    for (const auto& [problem_id, score] : problem_scores) {
        const KgNode& problem = graph.node(problem_id);
        const RelationKind wanted =
            problem.kind == NodeKind::Cause ? RelationKind::Addresses : RelationKind::Mitigates;
        for (const auto& eid : graph.in_edges(problem_id)) {
            const KgEdge& e = *graph.find_edge(eid);
            if (e.kind != wanted) continue;
            auto& s = candidates[e.source];
            s.intervention_id = e.source;
            s.score += score;
            (wanted == RelationKind::Addresses ? s.addressed_causes : s.mitigated_effects)
                .push_back(problem_id);
        }
    }

    std::vector<InterventionSuggestion> out;
    out.reserve(candidates.size());
    for (auto& [id, s] : candidates) {
        sort_unique(s.addressed_causes);
        sort_unique(s.mitigated_effects);
        s.companions = companions_of(graph, id);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), suggestion_ranks_before);
    if (out.size() > config.max_interventions) out.resize(config.max_interventions);
    return out;
}

std::vector<InterventionSuggestion> general_effective_interventions(const KnowledgeGraph& graph,
                                                                    const KgRetrievalConfig& config) {
    config.validate();
    std::vector<InterventionSuggestion> out;
    for (const auto& [id, node] : graph.nodes()) {
        if (node.kind != NodeKind::Intervention) continue;
        InterventionSuggestion s;
        s.intervention_id = id;
        std::size_t degree = 0;
        for (const auto& eid : graph.out_edges(id)) {
            const KgEdge& e = *graph.find_edge(eid);
            if (!is_beneficial(e.kind)) continue;
            ++degree;
            if (e.kind == RelationKind::Addresses) s.addressed_causes.push_back(e.target);
            if (e.kind == RelationKind::Mitigates) s.mitigated_effects.push_back(e.target);
        }
        sort_unique(s.addressed_causes);
        sort_unique(s.mitigated_effects);
        s.companions = companions_of(graph, id);
        s.score = static_cast<double>(degree);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), suggestion_ranks_before);
    if (out.size() > config.max_general) out.resize(config.max_general);
    return out;
}

bool chain_is_valid(const KnowledgeGraph& graph, const CausalChain& chain) {
    if (chain.node_ids.size() < 2 || chain.relation_kinds.size() + 1 != chain.node_ids.size()) {
        return false;
    }
    const KgNode* first = graph.find_node(chain.node_ids.front());
    const KgNode* last = graph.find_node(chain.node_ids.back());
    if (!first || !last || first->kind != NodeKind::Cause) return false;
    if (last->kind != NodeKind::Cause && last->kind != NodeKind::Effect) return false;
    std::set<std::string> seen(chain.node_ids.begin(), chain.node_ids.end());
    if (seen.size() != chain.node_ids.size()) return false;
    for (std::size_t i = 0; i + 1 < chain.node_ids.size(); ++i) {
        const RelationKind kind = chain.relation_kinds[i];
        if (!is_chain_relation(kind)) return false;
        if (!graph.has_triple(chain.node_ids[i], chain.node_ids[i + 1], kind)) return false;
    }
    return chain.relevance >= 0.0;
}

}  // namespace kgcounsel
