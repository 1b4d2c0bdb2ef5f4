#include "kgcounsel/kg_store.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgcounsel/io.hpp"

namespace kgcounsel {

using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 5> kNodeKindNames{
    "Cause", "Effect", "Intervention", "Outcome", "Category"};

constexpr std::array<std::string_view, 9> kRelationNames{
    "MITIGATES", "LEADS_TO", "CAUSES", "ADDRESSES", "BELONGS_TO",
    "COMPLEMENTS", "RELATED_TO", "EXACERBATES", "REQUIRES"};

std::string triple_key(std::string_view source, std::string_view target, RelationKind kind) {
    std::string key;
    key.reserve(source.size() + target.size() + 4);
    key.append(source).push_back('\x1f');
    key.append(target).push_back('\x1f');
    key.push_back(static_cast<char>('0' + static_cast<int>(kind)));
    return key;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

std::string kind_violation_message(const KgEdge& edge, NodeKind source, NodeKind target) {
    std::ostringstream msg;
    msg << "edge " << edge.id << " (" << to_string(edge.kind) << ") expects "
        << describe_rule(edge.kind) << ", got " << to_string(source) << " -> "
        << to_string(target);
    return msg.str();
}

const std::vector<std::string> kNoEdges;

}  // namespace

std::string_view to_string(NodeKind kind) { return kNodeKindNames[static_cast<std::size_t>(kind)]; }

std::string_view to_string(RelationKind kind) {
    return kRelationNames[static_cast<std::size_t>(kind)];
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
    for (std::size_t i = 0; i < kNodeKindNames.size(); ++i) {
        if (kNodeKindNames[i] == text) return kAllNodeKinds[i];
    }
    return std::nullopt;
}

std::optional<RelationKind> parse_relation_kind(std::string_view text) {
    for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
        if (kRelationNames[i] == text) return static_cast<RelationKind>(i);
    }
    return std::nullopt;
}

bool endpoint_rule(RelationKind relation, NodeKind source, NodeKind target) {
    using N = NodeKind;
    switch (relation) {
        case RelationKind::Mitigates: return source == N::Intervention && target == N::Effect;
        case RelationKind::LeadsTo: return source == N::Intervention && target == N::Outcome;
        case RelationKind::Causes: return source == N::Cause && target == N::Effect;
        case RelationKind::Addresses: return source == N::Intervention && target == N::Cause;
        case RelationKind::BelongsTo: return source != N::Category && target == N::Category;
        case RelationKind::Complements:
        case RelationKind::Requires:
            return source == N::Intervention && target == N::Intervention;
        case RelationKind::RelatedTo: return true;
        case RelationKind::Exacerbates: return source == N::Cause && target == N::Cause;
    }
    return false;
}

std::string describe_rule(RelationKind relation) {
    switch (relation) {
        case RelationKind::Mitigates: return "Intervention -> Effect";
        case RelationKind::LeadsTo: return "Intervention -> Outcome";
        case RelationKind::Causes: return "Cause -> Effect";
        case RelationKind::Addresses: return "Intervention -> Cause";
        case RelationKind::BelongsTo: return "non-Category -> Category";
        case RelationKind::Complements:
        case RelationKind::Requires: return "Intervention -> Intervention";
        case RelationKind::RelatedTo: return "any -> any";
        case RelationKind::Exacerbates: return "Cause -> Cause";
    }
    return "?";
}

std::string ValidationReport::summary() const {
    if (findings.empty()) return "ok";
    std::ostringstream out;
    for (std::size_t i = 0; i < findings.size(); ++i) {
        if (i) out << "; ";
        out << to_string(findings[i].code) << " [" << findings[i].subject << "] "
            << findings[i].message;
    }
    return out.str();
}

void KnowledgeGraph::add_node(KgNode node) {
    if (nodes_.count(node.id)) throw Error(ErrorCode::DuplicateId, "duplicate node id: " + node.id);
    if (blank(node.label)) throw Error(ErrorCode::EmptyLabel, "node " + node.id + " has an empty label");
    std::string id = node.id;
    adjacency_.try_emplace(id);
    nodes_.emplace(std::move(id), std::move(node));
}

void KnowledgeGraph::add_edge(KgEdge edge) {
    const KgNode* source = find_node(edge.source);
    const KgNode* target = find_node(edge.target);
    if (!source || !target) {
        throw Error(ErrorCode::MissingEndpoint,
                    "edge " + edge.id + " references missing node " +
                        (source ? edge.target : edge.source));
    }
    if (!endpoint_rule(edge.kind, source->kind, target->kind)) {
        throw Error(ErrorCode::KindViolation,
                    kind_violation_message(edge, source->kind, target->kind));
    }
    auto key = triple_key(edge.source, edge.target, edge.kind);
    if (triples_.count(key)) {
        throw Error(ErrorCode::DuplicateEdge, "duplicate " + std::string(to_string(edge.kind)) +
                                                  " edge " + edge.source + " -> " + edge.target);
    }
    if (edges_.count(edge.id)) throw Error(ErrorCode::DuplicateId, "duplicate edge id: " + edge.id);

    // All checks passed; from here on nothing throws except allocation.
    triples_.emplace(std::move(key), edge.id);
    adjacency_[edge.source].out.push_back(edge.id);
    adjacency_[edge.target].in.push_back(edge.id);
    std::string id = edge.id;
    edges_.emplace(std::move(id), std::move(edge));
}

const KgNode* KnowledgeGraph::find_node(std::string_view id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const KgEdge* KnowledgeGraph::find_edge(std::string_view id) const {
    auto it = edges_.find(id);
    return it == edges_.end() ? nullptr : &it->second;
}

const KgNode& KnowledgeGraph::node(std::string_view id) const {
    if (const auto* n = find_node(id)) return *n;
    throw Error(ErrorCode::InvalidArgument, "unknown node id: " + std::string(id));
}

bool KnowledgeGraph::has_triple(std::string_view source, std::string_view target,
                                RelationKind kind) const {
    return triples_.count(triple_key(source, target, kind)) > 0;
}

const std::vector<std::string>& KnowledgeGraph::out_edges(std::string_view node_id) const {
    auto it = adjacency_.find(node_id);
    return it == adjacency_.end() ? kNoEdges : it->second.out;
}

const std::vector<std::string>& KnowledgeGraph::in_edges(std::string_view node_id) const {
    auto it = adjacency_.find(node_id);
    return it == adjacency_.end() ? kNoEdges : it->second.in;
}

GraphDocument KnowledgeGraph::to_document() const {
    GraphDocument doc;
    doc.nodes.reserve(nodes_.size());
    for (const auto& [id, n] : nodes_) doc.nodes.push_back(n);
    doc.edges.reserve(edges_.size());
    for (const auto& [id, e] : edges_) doc.edges.push_back(e);
    return doc;
}

ValidationReport validate_graph(const GraphDocument& document) {
    ValidationReport report;
    std::map<std::string, NodeKind, std::less<>> kinds;
    for (const auto& n : document.nodes) {
        if (!kinds.emplace(n.id, n.kind).second) {
            report.findings.push_back({ErrorCode::DuplicateId, n.id, "duplicate node id"});
        }
        if (blank(n.label)) {
            report.findings.push_back({ErrorCode::EmptyLabel, n.id, "empty label"});
        }
    }
    std::set<std::string> edge_ids;
    std::set<std::string> triples;
    for (const auto& e : document.edges) {
        if (!edge_ids.insert(e.id).second) {
            report.findings.push_back({ErrorCode::DuplicateId, e.id, "duplicate edge id"});
        }
        auto src = kinds.find(e.source);
        auto dst = kinds.find(e.target);
        if (src == kinds.end() || dst == kinds.end()) {
            const std::string& missing = src == kinds.end() ? e.source : e.target;
            report.findings.push_back(
                {ErrorCode::MissingEndpoint, e.id, "references missing node " + missing});
            continue;
        }
        if (!endpoint_rule(e.kind, src->second, dst->second)) {
            report.findings.push_back(
                {ErrorCode::KindViolation, e.id, kind_violation_message(e, src->second, dst->second)});
            continue;
        }
        if (!triples.insert(triple_key(e.source, e.target, e.kind)).second) {
            report.findings.push_back({ErrorCode::DuplicateEdge, e.id,
                                       "repeats " + std::string(to_string(e.kind)) + " " +
                                           e.source + " -> " + e.target});
        }
    }
    return report;
}

ValidationReport validate_graph(const KnowledgeGraph& graph) {
    return validate_graph(graph.to_document());
}

StatsReport graph_stats(const KnowledgeGraph& graph) {
    StatsReport stats;
    stats.node_count = graph.node_count();
    stats.edge_count = graph.edge_count();
    for (const auto& [id, n] : graph.nodes()) ++stats.by_node_kind[static_cast<std::size_t>(n.kind)];
    for (const auto& [id, e] : graph.edges()) ++stats.by_relation[static_cast<std::size_t>(e.kind)];
    return stats;
}

std::string save_graph(const KnowledgeGraph& graph) {
    ordered_json doc;
    doc["nodes"] = ordered_json::array();
    doc["edges"] = ordered_json::array();
    for (const auto& [id, n] : graph.nodes()) {
        ordered_json attrs = ordered_json::object();
        for (const auto& [k, v] : n.attributes) attrs[k] = v;
        doc["nodes"].push_back({{"id", n.id},
                                {"label", n.label},
                                {"kind", to_string(n.kind)},
                                {"attributes", std::move(attrs)}});
    }
    for (const auto& [id, e] : graph.edges()) {
        doc["edges"].push_back({{"id", e.id},
                                {"source", e.source},
                                {"target", e.target},
                                {"kind", to_string(e.kind)},
                                {"provenance", e.provenance}});
    }
    return doc.dump(2) + "\n";
}

namespace {

void reject_unknown_fields(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                           std::string_view where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError("unknown field '" + key + "' in " + std::string(where));
        }
    }
}

std::string required_string(const nlohmann::json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(std::string(where) + " requires string field '" + key + "'");
    }
    return it->get<std::string>();
}

}  // namespace

GraphDocument parse_graph_document(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid graph JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("graph document must be a JSON object");
    reject_unknown_fields(doc, {"nodes", "edges"}, "graph document");
    if (!doc.contains("nodes") || !doc["nodes"].is_array() || !doc.contains("edges") ||
        !doc["edges"].is_array()) {
        throw ParseError("graph document requires 'nodes' and 'edges' arrays");
    }

    GraphDocument out;
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object()) throw ParseError("node entries must be objects");
        reject_unknown_fields(jn, {"id", "label", "kind", "attributes"}, "node");
        KgNode n;
        n.id = required_string(jn, "id", "node");
        n.label = required_string(jn, "label", "node " + n.id);
        const auto kind_text = required_string(jn, "kind", "node " + n.id);
        auto kind = parse_node_kind(kind_text);
        if (!kind) throw ParseError("node " + n.id + " has unknown kind '" + kind_text + "'");
        n.kind = *kind;
        if (auto it = jn.find("attributes"); it != jn.end()) {
            if (!it->is_object()) throw ParseError("node " + n.id + " attributes must be an object");
            for (const auto& [k, v] : it->items()) {
                if (!v.is_string()) throw ParseError("node " + n.id + " attribute '" + k + "' must be a string");
                n.attributes.emplace(k, v.get<std::string>());
            }
        }
        out.nodes.push_back(std::move(n));
    }
    for (const auto& je : doc["edges"]) {
        if (!je.is_object()) throw ParseError("edge entries must be objects");
        reject_unknown_fields(je, {"id", "source", "target", "kind", "provenance"}, "edge");
        KgEdge e;
        e.id = required_string(je, "id", "edge");
        e.source = required_string(je, "source", "edge " + e.id);
        e.target = required_string(je, "target", "edge " + e.id);
        const auto kind_text = required_string(je, "kind", "edge " + e.id);
        auto kind = parse_relation_kind(kind_text);
        if (!kind) throw ParseError("edge " + e.id + " has unknown kind '" + kind_text + "'");
        e.kind = *kind;
        if (auto it = je.find("provenance"); it != je.end()) {
            if (!it->is_array()) throw ParseError("edge " + e.id + " provenance must be an array");
            for (const auto& p : *it) {
                if (!p.is_string()) throw ParseError("edge " + e.id + " provenance entries must be strings");
                e.provenance.push_back(p.get<std::string>());
            }
        }
        out.edges.push_back(std::move(e));
    }
    return out;
}

KnowledgeGraph load_graph(std::string_view text) {
    GraphDocument doc = parse_graph_document(text);
    if (auto report = validate_graph(doc); !report.ok()) throw GraphValidationError(std::move(report));
    KnowledgeGraph graph;
    for (auto& n : doc.nodes) graph.add_node(std::move(n));
    for (auto& e : doc.edges) graph.add_edge(std::move(e));
    return graph;
}

KnowledgeGraph load_graph_file(const std::filesystem::path& path) {
    return load_graph(read_file(path));
}

void save_graph_file(const KnowledgeGraph& graph, const std::filesystem::path& path) {
    write_file(path, save_graph(graph));
}

}  // namespace kgcounsel
