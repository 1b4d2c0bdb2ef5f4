#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgcounsel/error.hpp"

namespace kgcounsel {

enum class NodeKind { Cause, Effect, Intervention, Outcome, Category };

enum class RelationKind {
    Mitigates,
    LeadsTo,
    Causes,
    Addresses,
    BelongsTo,
    Complements,
    RelatedTo,
    Exacerbates,
    Requires,
};

inline constexpr std::array<NodeKind, 5> kAllNodeKinds{
    NodeKind::Cause, NodeKind::Effect, NodeKind::Intervention, NodeKind::Outcome,
    NodeKind::Category};

// Ordered as the relation distribution table lists them (largest first).
inline constexpr std::array<RelationKind, 9> kAllRelationKinds{
    RelationKind::Mitigates,   RelationKind::LeadsTo,   RelationKind::Causes,
    RelationKind::Addresses,   RelationKind::BelongsTo, RelationKind::Complements,
    RelationKind::RelatedTo,   RelationKind::Exacerbates, RelationKind::Requires};

std::string_view to_string(NodeKind kind);
std::string_view to_string(RelationKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<RelationKind> parse_relation_kind(std::string_view text);

// Endpoint-kind rule of a relation:
//   MITIGATES    Intervention -> Effect       LEADS_TO    Intervention -> Outcome
//   CAUSES       Cause -> Effect              ADDRESSES   Intervention -> Cause
//   BELONGS_TO   non-Category -> Category     COMPLEMENTS Intervention -> Intervention
//   RELATED_TO   any -> any                   EXACERBATES Cause -> Cause
//   REQUIRES     Intervention -> Intervention
bool endpoint_rule(RelationKind relation, NodeKind source, NodeKind target);

// "Intervention -> Effect" style description used in diagnostics.
std::string describe_rule(RelationKind relation);

struct KgNode {
    std::string id;
    std::string label;
    NodeKind kind = NodeKind::Cause;
    std::map<std::string, std::string> attributes;

    bool operator==(const KgNode&) const = default;
};

struct KgEdge {
    std::string id;
    std::string source;
    std::string target;
    RelationKind kind = RelationKind::RelatedTo;
    std::vector<std::string> provenance;

    bool operator==(const KgEdge&) const = default;
};

struct Finding {
    ErrorCode code;
    std::string subject;  // node or edge id
    std::string message;

    bool operator==(const Finding&) const = default;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const { return findings.empty(); }
    std::string summary() const;
};

struct StatsReport {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::array<std::size_t, kAllRelationKinds.size()> by_relation{};
    std::array<std::size_t, kAllNodeKinds.size()> by_node_kind{};

    std::size_t relation_count(RelationKind kind) const {
        return by_relation[static_cast<std::size_t>(kind)];
    }
    std::size_t node_kind_count(NodeKind kind) const {
        return by_node_kind[static_cast<std::size_t>(kind)];
    }

    bool operator==(const StatsReport&) const = default;
};

// Unvalidated node/edge lists as read from a file; the input of post-hoc validation.
struct GraphDocument {
    std::vector<KgNode> nodes;
    std::vector<KgEdge> edges;
};

// Typed property graph. Every mutator either succeeds or throws leaving the
// graph untouched, so a built graph always satisfies validate_graph.
// Maps are ordered by id, which makes every iteration deterministic.
class KnowledgeGraph {
public:
    // Throws DuplicateId / EmptyLabel.
    void add_node(KgNode node);

    // Throws MissingEndpoint / KindViolation / DuplicateEdge / DuplicateId.
    void add_edge(KgEdge edge);

    const KgNode* find_node(std::string_view id) const;
    const KgEdge* find_edge(std::string_view id) const;
    const KgNode& node(std::string_view id) const;  // throws InvalidArgument when absent

    bool has_triple(std::string_view source, std::string_view target, RelationKind kind) const;

    const std::vector<std::string>& out_edges(std::string_view node_id) const;
    const std::vector<std::string>& in_edges(std::string_view node_id) const;

    const std::map<std::string, KgNode, std::less<>>& nodes() const { return nodes_; }
    const std::map<std::string, KgEdge, std::less<>>& edges() const { return edges_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    GraphDocument to_document() const;

private:
    struct Adjacency {
        std::vector<std::string> out;
        std::vector<std::string> in;
    };

    std::map<std::string, KgNode, std::less<>> nodes_;
    std::map<std::string, KgEdge, std::less<>> edges_;
    std::map<std::string, Adjacency, std::less<>> adjacency_;
    std::map<std::string, std::string, std::less<>> triples_;  // "src\x1ftgt\x1fkind" -> edge id
};

ValidationReport validate_graph(const GraphDocument& document);
ValidationReport validate_graph(const KnowledgeGraph& graph);

StatsReport graph_stats(const KnowledgeGraph& graph);

// Canonical JSON: nodes and edges sorted by id, two-space indent, trailing newline.
std::string save_graph(const KnowledgeGraph& graph);

// Parses without validating. Throws ParseError on malformed JSON, unknown
// fields or unknown kind strings.
GraphDocument parse_graph_document(std::string_view text);

// Parses, validates and builds. Throws ParseError, or ValidationError whose
// message lists every finding.
KnowledgeGraph load_graph(std::string_view text);

KnowledgeGraph load_graph_file(const std::filesystem::path& path);
void save_graph_file(const KnowledgeGraph& graph, const std::filesystem::path& path);

class GraphValidationError : public Error {
public:
    explicit GraphValidationError(ValidationReport report)
        : Error(ErrorCode::ValidationError, "graph validation failed: " + report.summary()),
          report_(std::move(report)) {}

    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

}  // namespace kgcounsel
