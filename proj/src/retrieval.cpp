#include "kgcounsel/retrieval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "kgcounsel/io.hpp"
#include "kgcounsel/text.hpp"

namespace kgcounsel {

using nlohmann::json;

namespace {

std::vector<std::string> distinct_tokens(std::string_view text) {
    auto set = token_set(text);
    return {set.begin(), set.end()};
}

bool hit_before(const RetrievalHit& a, const RetrievalHit& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.chunk_id < b.chunk_id;
}

}  // namespace

const IndexEntry* ChunkIndex::find(std::string_view chunk_id) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), chunk_id,
                               [](const IndexEntry& e, std::string_view id) { return e.chunk_id < id; });
    return it != entries.end() && it->chunk_id == chunk_id ? &*it : nullptr;
}

ChunkIndex build_index(const std::vector<Chunk>& chunks, EmbeddingProvider& provider,
                       const BuildOptions& options, BuildStats* stats) {
    if (chunks.empty()) throw Error(ErrorCode::InvalidArgument, "cannot build an index from zero chunks");
    if (options.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");

    // Canonical order first, so batching can never change the artifact.
    std::vector<const Chunk*> ordered;
    ordered.reserve(chunks.size());
    for (const auto& c : chunks) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(), [](const Chunk* a, const Chunk* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->id == ordered[i - 1]->id) {
            throw Error(ErrorCode::InvalidArgument, "duplicate chunk id " + ordered[i]->id);
        }
    }

    ChunkIndex index;
    index.provider = provider.name();
    index.dim = provider.dim();
    index.vectors.resize(static_cast<Eigen::Index>(ordered.size()), static_cast<Eigen::Index>(index.dim));

    BuildStats local;
    for (std::size_t start = 0; start < ordered.size(); start += options.batch_size) {
        const std::size_t end = std::min(start + options.batch_size, ordered.size());
        std::vector<std::string> texts;
        for (std::size_t i = start; i < end; ++i) texts.push_back(ordered[i]->text);

        const int retries_before = local.retries;
        std::vector<EmbeddingVector> vectors;
        try {
            vectors = with_retry(
                options.retry, [&] { return provider.embed_texts(texts); },
                [](std::exception_ptr ep) {
                    try {
                        std::rethrow_exception(ep);
                    } catch (const ProviderError& e) {
                        return e.retryable();
                    } catch (...) {
                        return false;
                    }
                },
                &local.retries, options.sleep);
        } catch (const ProviderError& e) {
            const int attempts = local.retries - retries_before + 1;
            throw ProviderError(std::string(e.what()) + " (after " + std::to_string(attempts) + " attempt(s))",
                                e.status(), e.retryable(), attempts);
        }
        ++local.batches;
        if (vectors.size() != texts.size()) {
            throw ProviderError("provider returned " + std::to_string(vectors.size()) + " vectors for " +
                                    std::to_string(texts.size()) + " texts",
                                0, false);
        }
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            if (static_cast<std::size_t>(vectors[i].size()) != index.dim) {
                throw Error(ErrorCode::DimDrift, "provider " + index.provider + " returned dimension " +
                                                     std::to_string(vectors[i].size()) + ", expected " +
                                                     std::to_string(index.dim));
            }
            index.vectors.row(static_cast<Eigen::Index>(start + i)) = normalized(vectors[i]).transpose();
        }
    }

    index.entries.reserve(ordered.size());
    for (const Chunk* c : ordered) {
        index.entries.push_back({c->id, c->case_id, c->session_index, c->text, distinct_tokens(c->text)});
    }
    if (stats) *stats = local;
    return index;
}

void SearchOptions::validate() const {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    if (!(dense_weight >= 0.0 && dense_weight <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "dense weight must lie in [0, 1]");
    }
}

double sparse_overlap(const std::vector<std::string>& query_tokens,
                      const std::vector<std::string>& chunk_tokens) {
    if (query_tokens.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& t : query_tokens) {
        hits += std::binary_search(chunk_tokens.begin(), chunk_tokens.end(), t) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(query_tokens.size());
}

double combine_scores(double dense, double sparse, double dense_weight) {
    if (dense_weight == 1.0) return dense;
    return dense_weight * (dense + 1.0) / 2.0 + (1.0 - dense_weight) * sparse;
}

std::vector<RetrievalHit> search_vector(const ChunkIndex& index, const EmbeddingVector& query,
                                        std::string_view query_text, const SearchOptions& options) {
    options.validate();
    if (index.entries.empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
    if (static_cast<std::size_t>(query.size()) != index.dim) {
        throw Error(ErrorCode::DimMismatch, "query dimension " + std::to_string(query.size()) +
                                                " does not match index dimension " + std::to_string(index.dim));
    }
    const EmbeddingVector q = normalized(query);
    const auto query_tokens = distinct_tokens(query_text);

    std::vector<RetrievalHit> hits;
    hits.reserve(index.entries.size());
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
        RetrievalHit h;
        h.chunk_id = index.entries[i].chunk_id;
        // Row by row rather than one GEMV: identical rows then score identical bits.
        h.dense_score = std::clamp(index.vectors.row(static_cast<Eigen::Index>(i)).dot(q), -1.0, 1.0);
        h.sparse_score = sparse_overlap(query_tokens, index.entries[i].tokens);
        h.combined = combine_scores(h.dense_score, h.sparse_score, options.dense_weight);
        hits.push_back(std::move(h));
    }
    const std::size_t k = std::min(options.k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), hit_before);
    hits.resize(k);
    return hits;
}

std::vector<RetrievalHit> search(const ChunkIndex& index, std::string_view query_text,
                                 EmbeddingProvider& provider, const SearchOptions& options) {
    options.validate();
    if (index.entries.empty()) throw Error(ErrorCode::EmptyIndex, "index is empty");
    auto vectors = provider.embed_texts({std::string(query_text)});
    if (vectors.size() != 1) throw ProviderError("provider returned no query embedding", 0, false);
    return search_vector(index, vectors.front(), query_text, options);
}

std::string save_index(const ChunkIndex& index) {
    json doc;
    doc["provider"] = index.provider;
    doc["dim"] = index.dim;
    json entries = json::array();
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
        const auto& e = index.entries[i];
        const auto row = index.vectors.row(static_cast<Eigen::Index>(i));
        std::vector<double> embedding(row.data(), row.data() + row.size());
        entries.push_back({{"chunk_id", e.chunk_id},
                           {"case_id", e.case_id},
                           {"session_index", e.session_index},
                           {"text", e.text},
                           {"embedding", std::move(embedding)}});
    }
    doc["entries"] = std::move(entries);
    return doc.dump() + "\n";
}

ChunkIndex load_index(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid index JSON: ") + e.what());
    }
    try {
        ChunkIndex index;
        index.provider = doc.at("provider").get<std::string>();
        index.dim = doc.at("dim").get<std::size_t>();
        const auto& entries = doc.at("entries");
        if (!entries.is_array()) throw ParseError("index entries must be an array");
        index.vectors.resize(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(index.dim));
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& je = entries[i];
            IndexEntry e;
            e.chunk_id = je.at("chunk_id").get<std::string>();
            e.case_id = je.value("case_id", std::string());
            e.session_index = je.value("session_index", 0);
            e.text = je.at("text").get<std::string>();
            e.tokens = distinct_tokens(e.text);
            const auto embedding = je.at("embedding").get<std::vector<double>>();
            if (embedding.size() != index.dim) {
                throw ParseError("entry " + e.chunk_id + " has dimension " + std::to_string(embedding.size()));
            }
            for (std::size_t d = 0; d < embedding.size(); ++d) {
                index.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = embedding[d];
            }
            if (i > 0 && !(index.entries.back().chunk_id < e.chunk_id)) {
                throw ParseError("index entries must be sorted by unique chunk id");
            }
            index.entries.push_back(std::move(e));
        }
        return index;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed index: ") + e.what());
    }
}

ChunkIndex load_index_file(const std::filesystem::path& path) { return load_index(read_file(path)); }

void save_index_file(const ChunkIndex& index, const std::filesystem::path& path) {
    write_file(path, save_index(index));
}

}  // namespace kgcounsel
