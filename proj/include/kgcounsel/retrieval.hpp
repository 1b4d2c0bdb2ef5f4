#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kgcounsel/corpus.hpp"
#include "kgcounsel/embedding.hpp"
#include "kgcounsel/retry.hpp"

namespace kgcounsel {

struct IndexEntry {
    std::string chunk_id;
    std::string case_id;
    int session_index = 0;
    std::string text;
    std::vector<std::string> tokens;  // sorted distinct normalized tokens; derived, not persisted
};

// Exhaustive (flat) index. Entries are sorted by chunk id and row i of
// `vectors` is the unit-length embedding of entries[i].
struct ChunkIndex {
    std::string provider;
    std::size_t dim = 0;
    std::vector<IndexEntry> entries;
    RowMatrix<double> vectors;

    std::size_t size() const { return entries.size(); }
    const IndexEntry* find(std::string_view chunk_id) const;
};

struct BuildOptions {
    std::size_t batch_size = 32;
    RetryPolicy retry{};
    SleepFn sleep = real_sleep;
};

struct BuildStats {
    std::size_t batches = 0;
    int retries = 0;
};

// Embeds every chunk exactly once and normalizes at build time. Throws
// InvalidArgument (no chunks / duplicate ids), ProviderError after the retry
// budget, DimDrift when the provider's dimensions are inconsistent.
ChunkIndex build_index(const std::vector<Chunk>& chunks, EmbeddingProvider& provider,
                       const BuildOptions& options = {}, BuildStats* stats = nullptr);

struct SearchOptions {
    std::size_t k = 3;
    double dense_weight = 1.0;

    void validate() const;
};

struct RetrievalHit {
    std::string chunk_id;
    double dense_score = 0.0;   // cosine, [-1, 1]
    double sparse_score = 0.0;  // |q ∩ c| / |q|, [0, 1]
    double combined = 0.0;

    bool operator==(const RetrievalHit&) const = default;
};

// |q ∩ c| / |q| over distinct normalized tokens; 0 for an empty query.
double sparse_overlap(const std::vector<std::string>& query_tokens,
                      const std::vector<std::string>& chunk_tokens);

// Combined score: raw cosine when dense_weight == 1, otherwise
// w * (cosine + 1) / 2 + (1 - w) * sparse. Sorted by (combined desc, id asc).
double combine_scores(double dense, double sparse, double dense_weight);

// Throws EmptyIndex, InvalidArgument for bad options, ProviderError.
std::vector<RetrievalHit> search(const ChunkIndex& index, std::string_view query_text,
                                 EmbeddingProvider& provider, const SearchOptions& options = {});

// Same ranking from an already-embedded query vector (normalized internally).
std::vector<RetrievalHit> search_vector(const ChunkIndex& index, const EmbeddingVector& query,
                                        std::string_view query_text, const SearchOptions& options = {});

// {provider, dim, entries: [{chunk_id, case_id, session_index, text, embedding}]}
std::string save_index(const ChunkIndex& index);
ChunkIndex load_index(std::string_view json_text);  // throws ParseError
ChunkIndex load_index_file(const std::filesystem::path& path);
void save_index_file(const ChunkIndex& index, const std::filesystem::path& path);

}  // namespace kgcounsel
