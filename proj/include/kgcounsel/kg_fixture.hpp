#pragma once

#include <array>
#include <cstdint>

#include "kgcounsel/kg_store.hpp"

namespace kgcounsel {

// Target shape of the synthetic reference graph. Relation counts default to the
// published relation distribution (642 edges); node kinds split 308 nodes.
struct ReferenceGraphShape {
    std::array<std::size_t, kAllRelationKinds.size()> relation_counts{368, 184, 92, 92, 23,
                                                                      20,  20,  14, 9};
    std::size_t causes = 70;
    std::size_t effects = 80;
    std::size_t interventions = 96;
    std::size_t outcomes = 50;
    std::size_t categories = 12;
    std::size_t case_count = 69;  // provenance ids case-001 .. case-NNN
};

// Deterministic synthetic counseling graph with kind-prefixed sequential ids
// ("cause-007") and plausible labels. Economic causes carry
// attributes["poverty_driver"] = "true". A handful of hand-picked edges
// (job loss -> sleep problems, ...) are always present so demo queries hit.
KnowledgeGraph generate_reference_graph(std::uint64_t seed = 2025,
                                        const ReferenceGraphShape& shape = {});

}  // namespace kgcounsel
