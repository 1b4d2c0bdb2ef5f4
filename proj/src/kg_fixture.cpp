#include "kgcounsel/kg_fixture.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "kgcounsel/text.hpp"
#include "vocabulary.hpp"

namespace kgcounsel {

namespace {

using namespace vocab;

constexpr std::array<std::string_view, 5> kCauseVariants{"", " (chronic)", " (recent)",
                                                         " (household)", " (recurring)"};
constexpr std::array<std::string_view, 5> kEffectVariants{"", " (mild)", " (moderate)",
                                                          " (severe)", " (persistent)"};
constexpr std::array<std::string_view, 6> kInterventionVariants{
    "", " (follow-up)", " (group)", " (home visit)", " (brief)", " (intensive)"};
constexpr std::array<std::string_view, 5> kOutcomeVariants{
    "", " (partial)", " (sustained)", " (early)", " (reported by family)"};

std::string seq_id(std::string_view prefix, std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "-%03zu", n);
    return std::string(prefix) + buf;
}

// Label i of a base x variant grid, cycling bases first so the first pass
// yields the plain labels.
template <std::size_t B, std::size_t V>
std::string grid_label(const std::array<std::string_view, B>& bases,
                       const std::array<std::string_view, V>& variants, std::size_t i) {
    const std::size_t round = i / B;
    std::string label(bases[i % B]);
    if (round < V) {
        label += variants[round];
    } else {
        label += " (variant " + std::to_string(round + 1) + ")";
    }
    return label;
}

struct Builder {
    KnowledgeGraph graph;
    SplitMix64 rng;
    std::size_t case_count;
    std::array<std::size_t, kAllRelationKinds.size()> made{};
    std::vector<std::string> causes, effects, interventions, outcomes, categories;

    Builder(std::uint64_t seed, std::size_t cases) : rng(seed), case_count(cases) {}

    std::string add(std::vector<std::string>& bucket, std::string_view prefix, NodeKind kind,
                    std::string label, bool poverty_driver = false) {
        KgNode n;
        n.id = seq_id(prefix, bucket.size() + 1);
        n.label = std::move(label);
        n.kind = kind;
        if (poverty_driver) n.attributes["poverty_driver"] = "true";
        graph.add_node(n);
        bucket.push_back(n.id);
        return n.id;
    }

    bool link(const std::string& source, const std::string& target, RelationKind kind) {
        if (source == target || graph.has_triple(source, target, kind)) return false;
        const auto k = static_cast<std::size_t>(kind);
        std::string prefix = casefold(to_string(kind));
        for (auto& ch : prefix) {
            if (ch == '_') ch = '-';
        }
        KgEdge e;
        e.id = seq_id(prefix, made[k] + 1);
        e.source = source;
        e.target = target;
        e.kind = kind;
        if (case_count) {
            const std::size_t refs = 1 + rng.below(2);
            for (std::size_t r = 0; r < refs; ++r) {
                auto ref = seq_id("case", 1 + rng.below(case_count));
                if (std::find(e.provenance.begin(), e.provenance.end(), ref) == e.provenance.end()) {
                    e.provenance.push_back(std::move(ref));
                }
            }
            std::sort(e.provenance.begin(), e.provenance.end());
        }
        graph.add_edge(std::move(e));
        ++made[k];
        return true;
    }

    const std::string& pick(const std::vector<std::string>& from) {
        return from[rng.below(from.size())];
    }

    void fill(RelationKind kind, std::size_t target, const std::vector<std::string>& sources,
              const std::vector<std::string>& targets) {
        const auto k = static_cast<std::size_t>(kind);
        if (sources.empty() || targets.empty()) return;
        // Rejection sampling; the bound guards against infeasible shapes.
        std::size_t guard = 0;
        while (made[k] < target && guard++ < 1000000) link(pick(sources), pick(targets), kind);
        if (made[k] < target) {
            throw Error(ErrorCode::InvalidArgument,
                        "reference graph shape cannot hold " + std::to_string(target) + " " +
                            std::string(to_string(kind)) + " edges");
        }
    }
};

}  // namespace

KnowledgeGraph generate_reference_graph(std::uint64_t seed, const ReferenceGraphShape& shape) {
    Builder b(seed, shape.case_count);

    for (std::size_t i = 0; i < shape.causes; ++i) {
        b.add(b.causes, "cause", NodeKind::Cause, grid_label(kCauseBases, kCauseVariants, i),
              i % kCauseBases.size() < kPovertyBases);
    }
    for (std::size_t i = 0; i < shape.effects; ++i)
        b.add(b.effects, "effect", NodeKind::Effect, grid_label(kEffectBases, kEffectVariants, i));
    for (std::size_t i = 0; i < shape.interventions; ++i)
        b.add(b.interventions, "intervention", NodeKind::Intervention,
              grid_label(kInterventionBases, kInterventionVariants, i));
    for (std::size_t i = 0; i < shape.outcomes; ++i)
        b.add(b.outcomes, "outcome", NodeKind::Outcome,
              grid_label(kOutcomeBases, kOutcomeVariants, i));
    for (std::size_t i = 0; i < shape.categories; ++i) {
        std::string label = i < kCategoryLabels.size()
                                ? std::string(kCategoryLabels[i])
                                : "category " + std::to_string(i + 1);
        b.add(b.categories, "category", NodeKind::Category, std::move(label));
    }

    // Hand-picked motif: economic hardship -> sleep loss and its remedies.
    auto nth = [](const std::vector<std::string>& v, std::size_t i) -> const std::string* {
        return i < v.size() ? &v[i] : nullptr;
    };
    auto curated = [&](const std::string* s, const std::string* t, RelationKind kind) {
        const auto k = static_cast<std::size_t>(kind);
        if (s && t && b.made[k] < shape.relation_counts[k]) b.link(*s, *t, kind);
    };
    using R = RelationKind;
    curated(nth(b.causes, 0), nth(b.effects, 0), R::Causes);          // job loss -> sleep problems
    curated(nth(b.causes, 0), nth(b.causes, 1), R::Exacerbates);      // job loss -> debt burden
    curated(nth(b.causes, 1), nth(b.effects, 1), R::Causes);          // debt burden -> worry
    curated(nth(b.causes, 2), nth(b.effects, 9), R::Causes);          // food insecurity -> affliction
    curated(nth(b.interventions, 9), nth(b.causes, 0), R::Addresses);  // livelihood -> job loss
    curated(nth(b.interventions, 5), nth(b.effects, 0), R::Mitigates); // sleep hygiene -> sleep
    curated(nth(b.interventions, 5), nth(b.outcomes, 0), R::LeadsTo);  // -> improved sleep
    curated(nth(b.interventions, 5), nth(b.interventions, 4), R::Complements);
    curated(nth(b.interventions, 9), nth(b.interventions, 0), R::Requires);
    curated(nth(b.causes, 0), nth(b.categories, 0), R::BelongsTo);

    // Every cause gets at least one CAUSES edge before the random fill.
    const auto causes_target = shape.relation_counts[static_cast<std::size_t>(R::Causes)];
    for (const auto& c : b.causes) {
        if (b.made[static_cast<std::size_t>(R::Causes)] >= causes_target) break;
        if (b.graph.out_edges(c).empty()) b.link(c, b.pick(b.effects), R::Causes);
    }

    std::vector<std::string> poverty(b.causes.begin(), b.causes.end());
    std::erase_if(poverty, [&](const std::string& id) {
        return !b.graph.node(id).attributes.count("poverty_driver");
    });
    if (poverty.empty()) poverty = b.causes;

    std::vector<std::string> non_category;
    std::vector<std::string> everything;
    for (const auto& [id, n] : b.graph.nodes()) {
        everything.push_back(id);
        if (n.kind != NodeKind::Category) non_category.push_back(id);
    }

    const auto& rc = shape.relation_counts;
    auto count = [&](R kind) { return rc[static_cast<std::size_t>(kind)]; };
    b.fill(R::Mitigates, count(R::Mitigates), b.interventions, b.effects);
    b.fill(R::LeadsTo, count(R::LeadsTo), b.interventions, b.outcomes);
    b.fill(R::Causes, count(R::Causes), b.causes, b.effects);
    b.fill(R::Addresses, count(R::Addresses), b.interventions, b.causes);
    b.fill(R::BelongsTo, count(R::BelongsTo), non_category, b.categories);
    b.fill(R::Complements, count(R::Complements), b.interventions, b.interventions);
    b.fill(R::RelatedTo, count(R::RelatedTo), everything, everything);
    b.fill(R::Exacerbates, count(R::Exacerbates), poverty, b.causes);
    b.fill(R::Requires, count(R::Requires), b.interventions, b.interventions);

    return std::move(b.graph);
}

}  // namespace kgcounsel
